#include "xad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "xad/errors.hpp"

namespace xad {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
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

double parse_numeric_cell(const std::string& cell, std::size_t row, const std::string& col) {
    const std::string t = trim(cell);
    if (t.empty()) {
        throw DataError("empty numeric cell at row " + std::to_string(row) + ", column '" + col +
                        "'");
    }
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw DataError("unparseable numeric cell '" + t + "' at row " + std::to_string(row) +
                        ", column '" + col + "'");
    }
    return v;
}

}  // namespace

SchemaConfig SchemaConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schema file: " + path);
    SchemaConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("schema file " + path + ": expected key = value, got '" + line +
                              "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "label") {
            cfg.label_column = value;
        } else if (key == "contextual") {
            cfg.contextual_columns = split_list(value);
        } else if (key == "features") {
            cfg.feature_columns = split_list(value);
        } else {
            throw ConfigError("schema file " + path + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

RawTable load_csv(const std::string& path, const SchemaConfig& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);

    std::string header_line;
    if (!std::getline(in, header_line)) throw DataError("dataset file has no header row: " + path);
    const std::vector<std::string> header = split_csv_line(header_line);

    auto col_of = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return static_cast<int>(i);
        return -1;
    };

    int label_col = -1;
    if (!schema.label_column.empty()) label_col = col_of(schema.label_column);

    std::vector<int> contextual_cols;
    RawTable table;
    for (const auto& name : schema.contextual_columns) {
        const int c = col_of(name);
        if (c < 0) throw DataError("contextual column '" + name + "' not found in " + path);
        contextual_cols.push_back(c);
        table.contextual_names.push_back(name);
    }

    std::vector<int> feature_cols;
    if (!schema.feature_columns.empty()) {
        for (const auto& name : schema.feature_columns) {
            const int c = col_of(name);
            if (c < 0) throw DataError("feature column '" + name + "' not found in " + path);
            feature_cols.push_back(c);
            table.feature_names.push_back(name);
        }
    } else {
        for (std::size_t i = 0; i < header.size(); ++i) {
            const int ci = static_cast<int>(i);
            if (ci == label_col) continue;
            if (std::find(contextual_cols.begin(), contextual_cols.end(), ci) !=
                contextual_cols.end())
                continue;
            feature_cols.push_back(ci);
            table.feature_names.push_back(trim(header[i]));
        }
    }
    if (label_col >= 0) table.label_name = schema.label_column;

    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DataError("row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size()));
        }
        RawRecord rec;
        for (std::size_t k = 0; k < contextual_cols.size(); ++k)
            rec.contextual.push_back(trim(cells[contextual_cols[k]]));
        rec.features.reserve(feature_cols.size());
        for (std::size_t k = 0; k < feature_cols.size(); ++k)
            rec.features.push_back(
                parse_numeric_cell(cells[feature_cols[k]], row, table.feature_names[k]));
        if (label_col >= 0) {
            const std::string lv = trim(cells[label_col]);
            if (!lv.empty()) {
                if (lv == "0") {
                    rec.label = 0;
                } else if (lv == "1") {
                    rec.label = 1;
                } else {
                    throw DataError("unknown label value '" + lv + "' at row " +
                                    std::to_string(row) + " (expected 0 or 1)");
                }
            }
        }
        table.records.push_back(std::move(rec));
    }
    return table;
}

Vector Normalizer::transform(const Vector& raw) const {
    if (raw.size() != mins.size()) {
        throw DimensionError("normalizer expects " + std::to_string(mins.size()) +
                             " features, got " + std::to_string(raw.size()));
    }
    Vector out(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        const double span = maxs[j] - mins[j];
        const double v = span > 0.0 ? (raw[j] - mins[j]) / span : 0.0;
        out[j] = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

Vector Normalizer::inverse(const Vector& normalized) const {
    if (normalized.size() != mins.size()) {
        throw DimensionError("normalizer expects " + std::to_string(mins.size()) +
                             " features, got " + std::to_string(normalized.size()));
    }
    Vector out(normalized.size());
    for (std::size_t j = 0; j < normalized.size(); ++j) {
        const double span = maxs[j] - mins[j];
        out[j] = span > 0.0 ? mins[j] + normalized[j] * span : mins[j];
    }
    return out;
}

std::string Normalizer::to_json() const {
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
        j[feature_names[i]] = {{"min", mins[i]}, {"max", maxs[i]}};
    }
    return j.dump(2);
}

Normalizer Normalizer::from_json(const std::string& text) {
    const auto j = nlohmann::ordered_json::parse(text);
    Normalizer n;
    for (auto it = j.begin(); it != j.end(); ++it) {
        n.feature_names.push_back(it.key());
        n.mins.push_back(it.value().at("min").get<double>());
        n.maxs.push_back(it.value().at("max").get<double>());
    }
    return n;
}

Normalizer fit_normalizer(const RawTable& table, const std::vector<std::size_t>& fit_rows) {
    if (table.records.empty() || fit_rows.empty())
        throw DataError("fit_normalizer: no rows to fit on");
    const std::size_t n = table.n_features();
    Normalizer norm;
    norm.feature_names = table.feature_names;
    norm.mins.assign(n, std::numeric_limits<double>::infinity());
    norm.maxs.assign(n, -std::numeric_limits<double>::infinity());
    for (const std::size_t r : fit_rows) {
        const auto& f = table.records.at(r).features;
        for (std::size_t j = 0; j < n; ++j) {
            norm.mins[j] = std::min(norm.mins[j], f[j]);
            norm.maxs[j] = std::max(norm.maxs[j], f[j]);
        }
    }
    return norm;
}

Normalizer fit_normalizer(const RawTable& table) {
    std::vector<std::size_t> all(table.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return fit_normalizer(table, all);
}

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        default: return "test";
    }
}

bool Dataset::has_labels() const {
    for (int v : y)
        if (v >= 0) return true;
    return false;
}

Vector Dataset::row(std::size_t i) const {
    Vector out(X.cols);
    for (std::size_t j = 0; j < X.cols; ++j) out[j] = X(i, j);
    return out;
}

bool Dataset::is_labeled(std::size_t i) const {
    return std::find(labeled_idx.begin(), labeled_idx.end(), i) != labeled_idx.end();
}

Dataset Dataset::subset(Split s) const {
    std::vector<std::size_t> keep = rows_of(s);
    std::vector<std::size_t> new_index(size(), static_cast<std::size_t>(-1));
    for (std::size_t k = 0; k < keep.size(); ++k) new_index[keep[k]] = k;

    Dataset out;
    out.X = Matrix(keep.size(), X.cols);
    out.y.resize(keep.size());
    out.split.assign(keep.size(), s);
    out.ids.resize(keep.size());
    out.feature_names = feature_names;
    out.normalizer = normalizer;
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const std::size_t r = keep[k];
        for (std::size_t j = 0; j < X.cols; ++j) out.X(k, j) = X(r, j);
        out.y[k] = y[r];
        out.ids[k] = ids[r];
    }
    for (const std::size_t r : labeled_idx)
        if (new_index[r] != static_cast<std::size_t>(-1)) out.labeled_idx.push_back(new_index[r]);
    for (const std::size_t r : unlabeled_idx)
        if (new_index[r] != static_cast<std::size_t>(-1))
            out.unlabeled_idx.push_back(new_index[r]);
    return out;
}

Vector Dataset::feature_means() const {
    std::vector<std::size_t> all(size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return feature_means(all);
}

Vector Dataset::feature_means(const std::vector<std::size_t>& rows) const {
    if (rows.empty()) throw DataError("feature_means: empty row set");
    Vector mu(n_features(), 0.0);
    for (const std::size_t r : rows)
        for (std::size_t j = 0; j < n_features(); ++j) mu[j] += X(r, j);
    for (double& v : mu) v /= static_cast<double>(rows.size());
    return mu;
}

std::vector<std::size_t> Dataset::rows_of(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) out.push_back(i);
    return out;
}

Dataset normalize(const RawTable& table, const Normalizer& normalizer) {
    if (table.records.empty()) throw DataError("normalize: empty table");
    const std::size_t n = table.n_features();
    Dataset ds;
    ds.X = Matrix(table.records.size(), n);
    ds.y.resize(table.records.size());
    ds.split.assign(table.records.size(), Split::train);
    ds.ids.resize(table.records.size());
    ds.feature_names = table.feature_names;
    ds.normalizer = normalizer;
    for (std::size_t i = 0; i < table.records.size(); ++i) {
        const Vector v = normalizer.transform(table.records[i].features);
        for (std::size_t j = 0; j < n; ++j) ds.X(i, j) = v[j];
        ds.ids[i] = i;
        if (table.records[i].label.has_value()) {
            ds.y[i] = *table.records[i].label;
            ds.labeled_idx.push_back(i);
        } else {
            ds.y[i] = -1;
            ds.unlabeled_idx.push_back(i);
        }
    }
    check_finite(ds.X, "normalize");
    return ds;
}

std::vector<Split> stratified_split_tags(const std::vector<int>& y, double train_frac,
                                         double val_frac, double test_frac, std::uint64_t seed) {
    if (train_frac < 0 || val_frac < 0 || test_frac < 0 ||
        std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
        throw ConfigError("split fractions must be nonnegative and sum to 1");
    }
    SeededRng rng(seed);
    std::vector<Split> tags(y.size(), Split::train);
    // Stratify by evaluation label; unknown labels form their own stratum.
    std::vector<std::vector<std::size_t>> groups(3);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const int g = y[i] < 0 ? 2 : y[i];
        groups[static_cast<std::size_t>(g)].push_back(i);
    }
    for (auto& g : groups) {
        rng.shuffle(g);
        const std::size_t n = g.size();
        const auto n_train = static_cast<std::size_t>(std::llround(train_frac * n));
        const auto n_val = static_cast<std::size_t>(std::llround(val_frac * n));
        for (std::size_t k = 0; k < n; ++k) {
            if (k < n_train)
                tags[g[k]] = Split::train;
            else if (k < n_train + n_val)
                tags[g[k]] = Split::val;
            else
                tags[g[k]] = Split::test;
        }
    }
    return tags;
}

void assign_splits(Dataset& ds, double train_frac, double val_frac, double test_frac,
                   std::uint64_t seed) {
    ds.split = stratified_split_tags(ds.y, train_frac, val_frac, test_frac, seed);
}

Dataset ingest_dataset(const std::string& csv_path, const SchemaConfig& schema,
                       double train_frac, double val_frac, double test_frac,
                       const std::string& labeled, std::uint64_t master_seed) {
    const RawTable table = load_csv(csv_path, schema);
    if (table.records.empty()) throw DataError("dataset is empty: " + csv_path);

    std::vector<int> raw_y(table.records.size(), -1);
    for (std::size_t i = 0; i < table.records.size(); ++i)
        if (table.records[i].label.has_value()) raw_y[i] = *table.records[i].label;
    const std::vector<Split> tags = stratified_split_tags(
        raw_y, train_frac, val_frac, test_frac, derive_seed(master_seed, "split"));

    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < tags.size(); ++i)
        if (tags[i] == Split::train) train_rows.push_back(i);

    Dataset ds = normalize(table, fit_normalizer(table, train_rows));
    ds.split = tags;

    if (labeled != "all") {
        char* end = nullptr;
        const long long n = std::strtoll(labeled.c_str(), &end, 10);
        if (end == labeled.c_str() || *end != '\0' || n < 0)
            throw ConfigError("labeled budget must be 'all' or a nonnegative integer, got '" +
                              labeled + "'");
        ds = make_semi_supervised_split(ds, static_cast<std::size_t>(n),
                                        derive_seed(master_seed, "labels"));
    }
    return ds;
}

Dataset make_semi_supervised_split(const Dataset& ds, std::size_t n_labeled, std::uint64_t seed) {
    if (n_labeled > ds.labeled_idx.size()) {
        throw DataError("requested " + std::to_string(n_labeled) + " labeled samples but only " +
                        std::to_string(ds.labeled_idx.size()) + " are available");
    }
    Dataset out = ds;
    out.labeled_idx.clear();
    out.unlabeled_idx.clear();

    std::vector<std::size_t> pos, neg;
    for (const std::size_t i : ds.labeled_idx) {
        (ds.y[i] == 1 ? pos : neg).push_back(i);
    }
    const std::size_t total = pos.size() + neg.size();
    // Class-stratified keep set, proportional within one sample.
    std::size_t keep_pos =
        total == 0 ? 0
                   : static_cast<std::size_t>(std::llround(
                         static_cast<double>(n_labeled) * static_cast<double>(pos.size()) /
                         static_cast<double>(total)));
    keep_pos = std::min(keep_pos, pos.size());
    std::size_t keep_neg = n_labeled - keep_pos;
    if (keep_neg > neg.size()) {
        keep_pos += keep_neg - neg.size();
        keep_neg = neg.size();
        keep_pos = std::min(keep_pos, pos.size());
    }

    SeededRng rng(seed);
    std::vector<char> keep(ds.size(), 0);
    for (const std::size_t k : rng.sample_without_replacement(pos.size(), keep_pos))
        keep[pos[k]] = 1;
    for (const std::size_t k : rng.sample_without_replacement(neg.size(), keep_neg))
        keep[neg[k]] = 1;

    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (keep[i])
            out.labeled_idx.push_back(i);
        else
            out.unlabeled_idx.push_back(i);
    }
    return out;
}

std::size_t labeled_quota(std::size_t batch_size, std::size_t n_labeled, std::size_t n_total) {
    if (n_labeled == 0 || n_total == 0) return 0;
    auto q = static_cast<std::size_t>(std::llround(
        static_cast<double>(batch_size) * static_cast<double>(n_labeled) /
        static_cast<double>(n_total)));
    q = std::max<std::size_t>(q, 1);
    return std::min(q, batch_size);
}

MiniBatch sample_batch(const Dataset& ds, std::size_t B_l, std::size_t B_u, double lambda,
                       SeededRng& rng) {
    if (ds.size() == 0) throw DataError("sample_batch: empty dataset");
    B_l = std::min(B_l, ds.labeled_idx.size());
    B_u = std::min(B_u, ds.unlabeled_idx.size());
    if (B_l + B_u == 0) throw DataError("sample_batch: batch size is zero");

    MiniBatch batch;
    batch.X = Matrix(B_l + B_u, ds.n_features());
    batch.y.assign(B_l + B_u, 0.0);
    batch.alpha.assign(B_l + B_u, 0.0);

    std::size_t r = 0;
    for (const std::size_t k : rng.sample_without_replacement(ds.labeled_idx.size(), B_l)) {
        const std::size_t src = ds.labeled_idx[k];
        for (std::size_t j = 0; j < ds.n_features(); ++j) batch.X(r, j) = ds.X(src, j);
        batch.y[r] = static_cast<double>(ds.y[src]);
        batch.alpha[r] = lambda;
        ++r;
    }
    for (const std::size_t k : rng.sample_without_replacement(ds.unlabeled_idx.size(), B_u)) {
        const std::size_t src = ds.unlabeled_idx[k];
        for (std::size_t j = 0; j < ds.n_features(); ++j) batch.X(r, j) = ds.X(src, j);
        ++r;
    }
    return batch;
}

void write_snapshot_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write snapshot: " + path);
    out << "sample_id,split,labeled,label";
    for (const auto& name : ds.feature_names) out << ',' << name;
    out << '\n';
    std::vector<char> lab(ds.size(), 0);
    for (const std::size_t i : ds.labeled_idx) lab[i] = 1;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ds.ids[i] << ',' << split_name(ds.split[i]) << ',' << int(lab[i]) << ','
            << ds.y[i];
        for (std::size_t j = 0; j < ds.n_features(); ++j)
            out << ',' << format_double(ds.X(i, j));
        out << '\n';
    }
}

void write_normalizer_json(const Normalizer& n, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write normalizer: " + path);
    out << n.to_json() << '\n';
}

}  // namespace xad
