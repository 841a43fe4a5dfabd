#include "xad/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "xad/errors.hpp"

namespace xad {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

KvConfig KvConfig::from_string(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section = "run";
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value, got '" + line + "'");
        cfg.values_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KvConfig KvConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

void KvConfig::set(const std::string& dotted_key, const std::string& value) {
    const std::size_t dot = dotted_key.find('.');
    if (dot == std::string::npos)
        throw ConfigError("override key must be section.key, got '" + dotted_key + "'");
    values_[trim(dotted_key.substr(0, dot))][trim(dotted_key.substr(dot + 1))] = trim(value);
}

bool KvConfig::has(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
}

std::string KvConfig::get(const std::string& section, const std::string& key,
                          const std::string& fallback) const {
    const auto s = values_.find(section);
    if (s == values_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

std::string KvConfig::canonical_string() const {
    std::string out;
    for (const auto& [section, kv] : values_) {
        for (const auto& [key, value] : kv) {
            out += section + "." + key + "=" + value + "\n";
        }
    }
    return out;
}

std::string KvConfig::pretty_string() const {
    std::string out;
    for (const auto& [section, kv] : values_) {
        out += "[" + section + "]\n";
        for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
        out += "\n";
    }
    return out;
}

namespace {

class Resolver {
public:
    explicit Resolver(const KvConfig& kv) : kv_(kv) {}

    double number(const std::string& sec, const std::string& key, double fallback) {
        const std::string raw = kv_.get(sec, key, "");
        if (raw.empty()) return fallback;
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (end == raw.c_str() || *end != '\0' || !std::isfinite(v)) {
            fail(sec, key, "expected a number, got '" + raw + "'");
            return fallback;
        }
        return v;
    }

    std::size_t count(const std::string& sec, const std::string& key, std::size_t fallback) {
        const double v = number(sec, key, static_cast<double>(fallback));
        if (v < 0 || v != std::floor(v)) {
            fail(sec, key, "expected a nonnegative integer");
            return fallback;
        }
        return static_cast<std::size_t>(v);
    }

    std::string text(const std::string& sec, const std::string& key,
                     const std::string& fallback) {
        return kv_.get(sec, key, fallback);
    }

    bool flag(const std::string& sec, const std::string& key, bool fallback) {
        const std::string raw = kv_.get(sec, key, "");
        if (raw.empty()) return fallback;
        if (raw == "true" || raw == "1" || raw == "yes") return true;
        if (raw == "false" || raw == "0" || raw == "no") return false;
        fail(sec, key, "expected true/false, got '" + raw + "'");
        return fallback;
    }

    void fail(const std::string& sec, const std::string& key, const std::string& why) {
        errors_.push_back(sec + "." + key + ": " + why);
    }

    void check(bool ok, const std::string& sec, const std::string& key,
               const std::string& why) {
        if (!ok) fail(sec, key, why);
    }

    void raise_if_failed() const {
        if (errors_.empty()) return;
        std::string msg = "configuration invalid (" + std::to_string(errors_.size()) +
                          " problem(s)):";
        for (const auto& e : errors_) msg += "\n  - " + e;
        throw ConfigError(msg);
    }

private:
    const KvConfig& kv_;
    std::vector<std::string> errors_;
};

std::vector<std::size_t> parse_widths(const std::string& raw, Resolver& r,
                                      const std::string& sec, const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto& tok : split_list(raw)) {
        char* end = nullptr;
        const long v = std::strtol(tok.c_str(), &end, 10);
        if (end == tok.c_str() || *end != '\0' || v <= 0) {
            r.fail(sec, key, "expected a comma list of positive integers");
            return out;
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

}  // namespace

RunConfig resolve_config(const KvConfig& kv) {
    Resolver r(kv);
    RunConfig cfg;

    cfg.csv_path = r.text("data", "csv", cfg.csv_path);
    cfg.schema_path = r.text("data", "schema", cfg.schema_path);
    cfg.train_frac = r.number("data", "train_frac", cfg.train_frac);
    cfg.val_frac = r.number("data", "val_frac", cfg.val_frac);
    cfg.test_frac = r.number("data", "test_frac", cfg.test_frac);
    r.check(cfg.train_frac > 0 && cfg.val_frac >= 0 && cfg.test_frac >= 0 &&
                std::abs(cfg.train_frac + cfg.val_frac + cfg.test_frac - 1.0) < 1e-9,
            "data", "train_frac", "split fractions must be nonnegative and sum to 1");
    cfg.labeled = r.text("data", "labeled", cfg.labeled);
    if (cfg.labeled != "all") {
        char* end = nullptr;
        const long v = std::strtol(cfg.labeled.c_str(), &end, 10);
        r.check(end != cfg.labeled.c_str() && *end == '\0' && v >= 0, "data", "labeled",
                "expected 'all' or a nonnegative integer");
    }
    cfg.seed = static_cast<std::uint64_t>(r.number("data", "seed", 7));

    cfg.train.lambda_c = r.number("train", "lambda_c", cfg.train.lambda_c);
    cfg.train.lambda = r.number("train", "lambda", cfg.train.lambda);
    cfg.train.lr = r.number("train", "lr", cfg.train.lr);
    cfg.train.batch_size = r.count("train", "batch_size", cfg.train.batch_size);
    cfg.train.steps = r.count("train", "steps", cfg.train.steps);
    cfg.train.log_interval = r.count("train", "log_interval", cfg.train.log_interval);
    cfg.train.latent_dim = r.count("train", "latent_dim", cfg.train.latent_dim);
    r.check(cfg.train.lambda_c >= 0, "train", "lambda_c", "must be nonnegative");
    r.check(cfg.train.lambda >= 0, "train", "lambda", "must be nonnegative");
    r.check(cfg.train.lr > 0, "train", "lr", "must be positive");
    r.check(cfg.train.batch_size > 0, "train", "batch_size", "must be positive");
    r.check(cfg.train.log_interval > 0, "train", "log_interval", "must be positive");
    const std::string enc_raw = r.text("train", "encoder_widths", "");
    if (!enc_raw.empty())
        cfg.train.encoder_widths = parse_widths(enc_raw, r, "train", "encoder_widths");
    const std::string dec_raw = r.text("train", "decoder_widths", "");
    if (!dec_raw.empty())
        cfg.train.decoder_widths = parse_widths(dec_raw, r, "train", "decoder_widths");
    const std::size_t hidden_layers = r.count("train", "hidden_layers", 0);
    if (hidden_layers > 0) {
        // Width schedule for layer-count sweeps: the first hidden layer is
        // first_hidden wide and each extra layer halves it (floor, minimum 4),
        // with the latent width appended; the decoder mirrors it plus the
        // latent-to-latent entry layer.
        const std::size_t first_hidden = r.count("train", "first_hidden", 64);
        std::vector<std::size_t> hidden;
        std::size_t w = first_hidden;
        for (std::size_t i = 0; i < hidden_layers; ++i) {
            hidden.push_back(std::max<std::size_t>(w, 4));
            w = std::max<std::size_t>(w / 2, 4);
        }
        cfg.train.encoder_widths = hidden;
        cfg.train.encoder_widths.push_back(cfg.train.latent_dim);
        cfg.train.decoder_widths.assign(1, cfg.train.latent_dim);
        for (std::size_t i = hidden.size(); i-- > 0;)
            cfg.train.decoder_widths.push_back(hidden[i]);
    }
    try {
        cfg.train.hidden_act =
            activation_from_name(r.text("train", "hidden_act", "relu"));
        cfg.train.output_act =
            activation_from_name(r.text("train", "output_act", "sigmoid"));
    } catch (const ConfigError& e) {
        r.fail("train", "hidden_act", e.what());
    }
    cfg.train.seed = cfg.seed;

    cfg.score.gamma = r.number("score", "gamma", cfg.score.gamma);
    r.check(cfg.score.gamma >= 0.0 && cfg.score.gamma <= 1.0, "score", "gamma",
            "must lie in [0,1]");
    const std::string policy = r.text("score", "threshold_policy", "quantile");
    if (policy == "quantile") {
        cfg.score.policy = ThresholdPolicy::quantile;
    } else if (policy == "fixed") {
        cfg.score.policy = ThresholdPolicy::fixed;
    } else {
        r.fail("score", "threshold_policy", "expected 'fixed' or 'quantile'");
    }
    cfg.score.quantile = r.number("score", "quantile", cfg.score.quantile);
    r.check(cfg.score.quantile > 0.0 && cfg.score.quantile < 1.0, "score", "quantile",
            "must lie in (0,1)");
    cfg.score.tau = r.number("score", "tau", cfg.score.tau);

    cfg.explain_method = r.text("explain", "method", cfg.explain_method);
    try {
        attribution_method_from_name(cfg.explain_method);
    } catch (const ConfigError&) {
        r.fail("explain", "method", "unknown method '" + cfg.explain_method + "'");
    }
    cfg.explain_samples = r.count("explain", "samples", cfg.explain_samples);
    cfg.mc_draws = r.count("explain", "mc_draws", cfg.mc_draws);
    cfg.kernel_samples = r.count("explain", "kernel_samples", cfg.kernel_samples);
    cfg.explain_target = r.text("explain", "target", cfg.explain_target);
    r.check(cfg.explain_target == "score" || cfg.explain_target == "yhat", "explain", "target",
            "expected 'score' or 'yhat'");
    cfg.explainer.lr = r.number("explain", "explainer_lr", cfg.explainer.lr);
    cfg.explainer.steps = r.count("explain", "explainer_steps", cfg.explainer.steps);
    cfg.explainer.eval_n = r.count("explain", "eval_n", cfg.explainer.eval_n);
    cfg.explainer.normalize = r.flag("explain", "normalize", cfg.explainer.normalize);
    cfg.explainer.use_adam = r.flag("explain", "explainer_adam", cfg.explainer.use_adam);
    r.check(cfg.explainer.lr > 0, "explain", "explainer_lr", "must be positive");
    r.check(cfg.explainer.steps > 0, "explain", "explainer_steps", "must be positive");
    r.check(cfg.explainer.eval_n > 0, "explain", "eval_n", "must be positive");
    const std::string hid_raw = r.text("explain", "explainer_hidden", "");
    if (!hid_raw.empty())
        cfg.explainer.hidden = parse_widths(hid_raw, r, "explain", "explainer_hidden");
    try {
        cfg.explainer.subset_distribution = subset_distribution_from_name(
            r.text("explain", "subset_distribution", "shapley-kernel"));
    } catch (const ConfigError& e) {
        r.fail("explain", "subset_distribution", e.what());
    }
    cfg.explainer.seed = cfg.seed;

    const std::string grid_raw = r.text("eval", "kappa_grid", "");
    if (!grid_raw.empty()) {
        cfg.kappa_grid.clear();
        for (const auto& tok : split_list(grid_raw)) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0' || v < 0 || v > 100) {
                r.fail("eval", "kappa_grid", "expected percentages in [0,100]");
                break;
            }
            cfg.kappa_grid.push_back(v);
        }
    }
    cfg.sensitivity_eps = r.number("eval", "sensitivity_eps", cfg.sensitivity_eps);
    cfg.sensitivity_draws = r.count("eval", "sensitivity_draws", cfg.sensitivity_draws);
    cfg.sensitivity_samples = r.count("eval", "sensitivity_samples", cfg.sensitivity_samples);
    cfg.agreement_samples = r.count("eval", "agreement_samples", cfg.agreement_samples);
    r.check(cfg.sensitivity_eps > 0, "eval", "sensitivity_eps", "must be positive");

    cfg.out_dir = r.text("run", "out", cfg.out_dir);

    r.raise_if_failed();
    return cfg;
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto widths = [](const std::vector<std::size_t>& w) {
        std::string s;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(w[i]);
        }
        return s;
    };
    auto grid = [](const std::vector<double>& g) {
        std::string s;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (i) s += ",";
            s += format_double(g[i]);
        }
        return s;
    };
    out << "[data]\n";
    out << "csv = " << cfg.csv_path << "\n";
    out << "schema = " << cfg.schema_path << "\n";
    out << "train_frac = " << format_double(cfg.train_frac) << "\n";
    out << "val_frac = " << format_double(cfg.val_frac) << "\n";
    out << "test_frac = " << format_double(cfg.test_frac) << "\n";
    out << "labeled = " << cfg.labeled << "\n";
    out << "seed = " << cfg.seed << "\n\n";
    out << "[train]\n";
    out << "lambda_c = " << format_double(cfg.train.lambda_c) << "\n";
    out << "lambda = " << format_double(cfg.train.lambda) << "\n";
    out << "lr = " << format_double(cfg.train.lr) << "\n";
    out << "batch_size = " << cfg.train.batch_size << "\n";
    out << "steps = " << cfg.train.steps << "\n";
    out << "log_interval = " << cfg.train.log_interval << "\n";
    out << "latent_dim = " << cfg.train.latent_dim << "\n";
    out << "encoder_widths = " << widths(cfg.train.encoder_widths) << "\n";
    out << "decoder_widths = " << widths(cfg.train.decoder_widths) << "\n";
    out << "hidden_act = " << activation_name(cfg.train.hidden_act) << "\n";
    out << "output_act = " << activation_name(cfg.train.output_act) << "\n\n";
    out << "[score]\n";
    out << "gamma = " << format_double(cfg.score.gamma) << "\n";
    out << "threshold_policy = "
        << (cfg.score.policy == ThresholdPolicy::quantile ? "quantile" : "fixed") << "\n";
    out << "quantile = " << format_double(cfg.score.quantile) << "\n";
    out << "tau = " << format_double(cfg.score.tau) << "\n\n";
    out << "[explain]\n";
    out << "method = " << cfg.explain_method << "\n";
    out << "samples = " << cfg.explain_samples << "\n";
    out << "mc_draws = " << cfg.mc_draws << "\n";
    out << "kernel_samples = " << cfg.kernel_samples << "\n";
    out << "target = " << cfg.explain_target << "\n";
    out << "explainer_lr = " << format_double(cfg.explainer.lr) << "\n";
    out << "explainer_steps = " << cfg.explainer.steps << "\n";
    out << "explainer_hidden = " << widths(cfg.explainer.hidden) << "\n";
    out << "eval_n = " << cfg.explainer.eval_n << "\n";
    out << "normalize = " << (cfg.explainer.normalize ? "true" : "false") << "\n";
    out << "explainer_adam = " << (cfg.explainer.use_adam ? "true" : "false") << "\n";
    out << "subset_distribution = "
        << subset_distribution_name(cfg.explainer.subset_distribution) << "\n\n";
    out << "[eval]\n";
    out << "kappa_grid = " << grid(cfg.kappa_grid) << "\n";
    out << "sensitivity_eps = " << format_double(cfg.sensitivity_eps) << "\n";
    out << "sensitivity_draws = " << cfg.sensitivity_draws << "\n";
    out << "sensitivity_samples = " << cfg.sensitivity_samples << "\n";
    out << "agreement_samples = " << cfg.agreement_samples << "\n";
    return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(render_config(cfg)); }

}  // namespace xad
