#include "xad/fastshapc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xad/errors.hpp"

namespace xad {

namespace {

Vector mlp_affine(const LayerParams& layer, const Vector& h) {
    Vector a(layer.out_dim());
    for (std::size_t i = 0; i < layer.out_dim(); ++i) {
        const double* row = &layer.W.data[i * layer.in_dim()];
        double acc = layer.b[i];
        for (std::size_t j = 0; j < layer.in_dim(); ++j) acc += row[j] * h[j];
        a[i] = acc;
    }
    return a;
}

struct MlpTrace {
    std::vector<Vector> pre;
    std::vector<Vector> act;  // act.back() is the linear output
};

MlpTrace mlp_forward(const std::vector<LayerParams>& net, const Vector& x) {
    MlpTrace t;
    const Vector* h = &x;
    for (const auto& layer : net) {
        t.pre.push_back(mlp_affine(layer, *h));
        if (layer.act == Activation::relu) {
            t.act.push_back(relu(t.pre.back()));
        } else {
            t.act.push_back(t.pre.back());
        }
        h = &t.act.back();
    }
    return t;
}

// Backprop of dL/d(output) through the MLP; gradients are accumulated into
// flat per-layer arrays laid out as [W row-major..., b...].
void mlp_backward(const std::vector<LayerParams>& net, const Vector& x, const MlpTrace& trace,
                  Vector delta, std::vector<std::vector<double>>& grads) {
    for (std::size_t l = net.size(); l-- > 0;) {
        const Vector& h_prev = (l == 0) ? x : trace.act[l - 1];
        const LayerParams& layer = net[l];
        auto& g = grads[l];
        const std::size_t in = layer.in_dim();
        for (std::size_t i = 0; i < layer.out_dim(); ++i) {
            const double d = delta[i];
            if (d == 0.0) continue;
            double* grow = &g[i * in];
            for (std::size_t j = 0; j < in; ++j) grow[j] += d * h_prev[j];
            g[layer.W.data.size() + i] += d;
        }
        if (l > 0) {
            Vector back(in, 0.0);
            for (std::size_t i = 0; i < layer.out_dim(); ++i) {
                const double d = delta[i];
                if (d == 0.0) continue;
                const double* row = &layer.W.data[i * in];
                for (std::size_t j = 0; j < in; ++j) back[j] += d * row[j];
            }
            if (net[l - 1].act == Activation::relu) {
                for (std::size_t j = 0; j < in; ++j)
                    if (trace.pre[l - 1][j] <= 0.0) back[j] = 0.0;
            }
            delta = std::move(back);
        }
    }
}

std::vector<char> sample_coalition(SubsetDistribution dist, std::size_t d, SeededRng& rng) {
    std::vector<char> bits(d, 0);
    if (dist == SubsetDistribution::shapley_kernel) {
        // Size k with probability proportional to 1/(k(d-k)), then a uniform
        // subset of that size.
        double total = 0.0;
        for (std::size_t k = 1; k < d; ++k)
            total += 1.0 / (static_cast<double>(k) * static_cast<double>(d - k));
        const double u = rng.uniform01() * total;
        double acc = 0.0;
        std::size_t k = d - 1;
        for (std::size_t c = 1; c < d; ++c) {
            acc += 1.0 / (static_cast<double>(c) * static_cast<double>(d - c));
            if (u <= acc) {
                k = c;
                break;
            }
        }
        for (const std::size_t j : rng.sample_without_replacement(d, k)) bits[j] = 1;
        return bits;
    }
    // Uniform over nonempty proper subsets via rejection.
    while (true) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < d; ++j) {
            bits[j] = static_cast<char>(rng.next_u64() & 1u);
            ones += bits[j];
        }
        if (ones > 0 && ones < d) return bits;
    }
}

}  // namespace

const char* subset_distribution_name(SubsetDistribution s) {
    return s == SubsetDistribution::shapley_kernel ? "shapley-kernel" : "uniform-nonempty";
}

SubsetDistribution subset_distribution_from_name(const std::string& name) {
    if (name == "shapley-kernel") return SubsetDistribution::shapley_kernel;
    if (name == "uniform-nonempty") return SubsetDistribution::uniform_nonempty;
    throw ConfigError("unknown subset distribution: " + name);
}

Vector normalize_efficiency(const Vector& phi, double delta) {
    Vector out = phi;
    double sum = 0.0;
    for (double v : out) sum += v;
    const double shift = (delta - sum) / static_cast<double>(out.size());
    for (double& v : out) v += shift;
    return out;
}

Vector explainer_raw_output(const ExplainerModel& explainer, const Vector& x) {
    if (x.size() != explainer.d)
        throw DimensionError("explainer expects " + std::to_string(explainer.d) +
                             " features, got " + std::to_string(x.size()));
    return mlp_forward(explainer.net, x).act.back();
}

Attribution explain(const ExplainerModel& explainer, const Vector& x) {
    Vector phi = explainer_raw_output(explainer, x);
    if (explainer.normalize) {
        if (!explainer.explained_fn)
            throw ArtifactError("explain: normalization needs the explained model bound");
        const double v_full = explainer.explained_fn(x);
        phi = normalize_efficiency(phi, v_full - explainer.v_empty);
    }
    Attribution out;
    out.phi = std::move(phi);
    out.method = AttributionMethod::fastshap_c;
    return out;
}

ExplainerTrainResult train_explainer(const ModelFn& explained_fn, const Dataset& train,
                                     const Dataset& heldout, const ValueFunctionConfig& vcfg,
                                     const ExplainerTrainConfig& cfg) {
    if (!explained_fn) throw ConfigError("train_explainer: missing explained model");
    if (train.size() == 0) throw DataError("train_explainer: empty training data");
    if (cfg.steps == 0) throw ConfigError("train_explainer: steps must be positive");
    if (cfg.eval_n == 0) throw ConfigError("train_explainer: eval_n must be positive");
    const std::size_t d = train.n_features();

    ExplainerTrainResult result;
    ExplainerModel& ex = result.model;
    ex.d = d;
    ex.normalize = cfg.normalize;
    ex.explained_fn = explained_fn;
    {
        SeededRng v0_rng(derive_seed(cfg.seed, "explainer-v0"));
        ex.v_empty =
            value_function(explained_fn, Vector(d, 0.0), CoalitionMask::empty(d), vcfg, &v0_rng);
    }

    {
        SeededRng init_rng(derive_seed(cfg.seed, "explainer-init"));
        std::size_t in = d;
        auto widths = cfg.hidden;
        widths.push_back(d);
        for (std::size_t i = 0; i < widths.size(); ++i) {
            LayerParams layer;
            layer.W = Matrix(widths[i], in);
            layer.b.assign(widths[i], 0.0);
            layer.act = (i + 1 == widths.size()) ? Activation::linear : Activation::relu;
            const double bound = std::sqrt(6.0 / static_cast<double>(in + widths[i]));
            for (double& w : layer.W.data) w = init_rng.uniform(-bound, bound);
            ex.net.push_back(std::move(layer));
            in = widths[i];
        }
    }

    std::vector<std::vector<double>> grads(ex.net.size());
    for (std::size_t l = 0; l < ex.net.size(); ++l)
        grads[l].assign(ex.net[l].n_params(), 0.0);

    std::vector<AdamState> adam;
    std::size_t adam_steps = 0;
    if (cfg.use_adam)
        for (const auto& layer : ex.net) adam.emplace_back(layer.n_params());

    SeededRng rng(derive_seed(cfg.seed, "explainer-train"));
    result.loss_history.reserve(cfg.steps);

    CoalitionMask mask;
    mask.d = d;
    const double inv_d = 1.0 / static_cast<double>(d);

    const std::size_t batch_draws = std::max<std::size_t>(cfg.batch_draws, 1);
    const double inv_batch = 1.0 / static_cast<double>(batch_draws);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
        double step_loss = 0.0;
        for (std::size_t draw = 0; draw < batch_draws; ++draw) {
            const std::size_t row = static_cast<std::size_t>(rng.uniform_int(train.size()));
            const Vector x = train.row(row);
            mask.bits = sample_coalition(cfg.subset_distribution, d, rng);

            const MlpTrace trace = mlp_forward(ex.net, x);
            Vector phi = trace.act.back();
            if (cfg.normalize) {
                const double v_full = explained_fn(x);
                phi = normalize_efficiency(phi, v_full - ex.v_empty);
            }

            const double v_s = value_function(explained_fn, x, mask, vcfg, &rng);
            double s_phi = 0.0;
            std::size_t s_count = 0;
            for (std::size_t j = 0; j < d; ++j) {
                if (mask.bits[j]) {
                    s_phi += phi[j];
                    ++s_count;
                }
            }
            const double residual = v_s - ex.v_empty - s_phi;
            step_loss += residual * residual * inv_batch;
            if (!std::isfinite(residual))
                throw NumericError("explainer training diverged at step " +
                                   std::to_string(step));

            // dL/dphi_raw; the normalization step projects s onto s - |s|/d * 1.
            Vector delta(d);
            const double s_frac = static_cast<double>(s_count) * inv_d;
            for (std::size_t j = 0; j < d; ++j) {
                double sj = mask.bits[j] ? 1.0 : 0.0;
                if (cfg.normalize) sj -= s_frac;
                delta[j] = -2.0 * residual * sj * inv_batch;
            }
            mlp_backward(ex.net, x, trace, std::move(delta), grads);
        }
        result.loss_history.push_back(step_loss);

        if (cfg.use_adam) ++adam_steps;
        for (std::size_t l = 0; l < ex.net.size(); ++l) {
            auto& layer = ex.net[l];
            if (cfg.use_adam) {
                const std::size_t nw = layer.W.data.size();
                AdamState& st = adam[l];
                adam_step_raw(layer.W.data.data(), grads[l].data(), st.m.data(), st.v.data(), nw,
                              adam_steps, st.beta1, st.beta2, st.epsilon, cfg.lr);
                adam_step_raw(layer.b.data(), grads[l].data() + nw, st.m.data() + nw,
                              st.v.data() + nw, layer.b.size(), adam_steps, st.beta1, st.beta2,
                              st.epsilon, cfg.lr);
            } else {
                for (std::size_t i = 0; i < layer.W.data.size(); ++i)
                    layer.W.data[i] -= cfg.lr * grads[l][i];
                for (std::size_t i = 0; i < layer.b.size(); ++i)
                    layer.b[i] -= cfg.lr * grads[l][layer.W.data.size() + i];
            }
        }
    }

    // CS / EM over held-out samples with fresh coalition draws.
    const Dataset& pool = heldout.size() > 0 ? heldout : train;
    SeededRng eval_rng(derive_seed(cfg.seed, "explainer-eval"));
    double cs = 0.0, em = 0.0, csc = 0.0, emc = 0.0;
    for (std::size_t k = 0; k < cfg.eval_n; ++k) {
        const Vector x = pool.row(static_cast<std::size_t>(eval_rng.uniform_int(pool.size())));
        const Attribution a = explain(ex, x);
        double phi_sum = 0.0;
        for (double v : a.phi) phi_sum += v;
        const double fx = explained_fn(x);
        cs += std::abs(fx - phi_sum);
        em += (fx - phi_sum) * (fx - phi_sum);

        mask.bits = sample_coalition(cfg.subset_distribution, d, eval_rng);
        const double v_s = value_function(explained_fn, x, mask, vcfg, &eval_rng);
        double s_phi = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            if (mask.bits[j]) s_phi += a.phi[j];
        csc += std::abs(v_s - ex.v_empty - s_phi);
        emc += (v_s - s_phi) * (v_s - s_phi);
    }
    const double inv_n = 1.0 / static_cast<double>(cfg.eval_n);
    result.diagnostics.cs = cs * inv_n;
    result.diagnostics.em = em * inv_n;
    result.diagnostics.cs_coalition = csc * inv_n;
    result.diagnostics.em_coalition = emc * inv_n;
    return result;
}

double confidence_score(const ExplainerModel& explainer, const std::vector<Vector>& samples) {
    if (samples.empty()) throw DataError("confidence_score: no samples");
    if (!explainer.explained_fn)
        throw ArtifactError("confidence_score: explained model not bound");
    double acc = 0.0;
    for (const Vector& x : samples) {
        const Attribution a = explain(explainer, x);
        double phi_sum = 0.0;
        for (double v : a.phi) phi_sum += v;
        acc += std::abs(explainer.explained_fn(x) - phi_sum);
    }
    return acc / static_cast<double>(samples.size());
}

double error_metric(const ExplainerModel& explainer, const std::vector<Vector>& samples) {
    if (samples.empty()) throw DataError("error_metric: no samples");
    if (!explainer.explained_fn) throw ArtifactError("error_metric: explained model not bound");
    double acc = 0.0;
    for (const Vector& x : samples) {
        const Attribution a = explain(explainer, x);
        double phi_sum = 0.0;
        for (double v : a.phi) phi_sum += v;
        const double diff = explainer.explained_fn(x) - phi_sum;
        acc += diff * diff;
    }
    return acc / static_cast<double>(samples.size());
}

std::string explainer_to_json(const ExplainerModel& model, const ExplainerTrainConfig& cfg,
                              const ExplainerDiagnostics& diag) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["kind"] = "fastshap_c";
    j["d"] = model.d;
    j["normalize"] = model.normalize;
    j["v_empty"] = model.v_empty;
    j["explained_model_hash"] = model.explained_model_hash;
    j["layers"] = nlohmann::ordered_json::array();
    for (const auto& l : model.net) {
        j["layers"].push_back({{"in", l.in_dim()},
                               {"out", l.out_dim()},
                               {"activation", activation_name(l.act)},
                               {"W", l.W.data},
                               {"b", l.b}});
    }
    j["train_config"] = {{"lr", cfg.lr},
                         {"steps", cfg.steps},
                         {"subset_distribution", subset_distribution_name(cfg.subset_distribution)},
                         {"seed", cfg.seed},
                         {"eval_n", cfg.eval_n},
                         {"use_adam", cfg.use_adam}};
    j["diagnostics"] = {{"cs", diag.cs},
                        {"em", diag.em},
                        {"cs_coalition", diag.cs_coalition},
                        {"em_coalition", diag.em_coalition}};
    return j.dump(2);
}

ExplainerModel explainer_from_json(const std::string& text, ExplainerDiagnostics* diag_out) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ArtifactError(std::string("explainer file is not valid JSON: ") + e.what());
    }
    if (j.value("kind", "") != "fastshap_c")
        throw ArtifactError("explainer file kind is not 'fastshap_c'");
    if (j.value("format_version", 0) != 1)
        throw ArtifactError("unsupported explainer format_version");
    ExplainerModel m;
    m.d = j.at("d").get<std::size_t>();
    m.normalize = j.at("normalize").get<bool>();
    m.v_empty = j.at("v_empty").get<double>();
    m.explained_model_hash = j.at("explained_model_hash").get<std::uint64_t>();
    for (const auto& lj : j.at("layers")) {
        LayerParams l;
        const auto out = lj.at("out").get<std::size_t>();
        const auto in = lj.at("in").get<std::size_t>();
        l.W = Matrix(out, in);
        l.W.data = lj.at("W").get<std::vector<double>>();
        l.b = lj.at("b").get<std::vector<double>>();
        l.act = activation_from_name(lj.at("activation").get<std::string>());
        if (l.W.data.size() != in * out || l.b.size() != out)
            throw ArtifactError("explainer layer payload has inconsistent shape");
        m.net.push_back(std::move(l));
    }
    if (diag_out) {
        const auto& dj = j.at("diagnostics");
        diag_out->cs = dj.at("cs").get<double>();
        diag_out->em = dj.at("em").get<double>();
        diag_out->cs_coalition = dj.at("cs_coalition").get<double>();
        diag_out->em_coalition = dj.at("em_coalition").get<double>();
    }
    return m;
}

void save_explainer(const std::string& path, const ExplainerModel& model,
                    const ExplainerTrainConfig& cfg, const ExplainerDiagnostics& diag) {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot write explainer file: " + path);
    out << explainer_to_json(model, cfg, diag) << '\n';
}

ExplainerModel load_explainer(const std::string& path, ExplainerDiagnostics* diag_out) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("cannot open explainer file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return explainer_from_json(ss.str(), diag_out);
}

}  // namespace xad
