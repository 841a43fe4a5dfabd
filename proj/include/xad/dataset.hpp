#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xad/numerics.hpp"

namespace xad {

// Column roles for one CSV file. Contextual columns are carried as metadata
// and never enter the feature matrix; an empty feature list means "all
// remaining columns, parsed as numeric".
struct SchemaConfig {
    std::string label_column;
    std::vector<std::string> contextual_columns;
    std::vector<std::string> feature_columns;

    static SchemaConfig from_file(const std::string& path);
};

struct RawRecord {
    std::vector<std::string> contextual;
    Vector features;
    std::optional<int> label;  // 0 normal, 1 anomalous
};

struct RawTable {
    std::vector<std::string> contextual_names;
    std::vector<std::string> feature_names;
    std::string label_name;  // empty when the file has no label column
    std::vector<RawRecord> records;

    std::size_t n_features() const { return feature_names.size(); }
};

RawTable load_csv(const std::string& path, const SchemaConfig& schema);

// Per-feature min-max scaling to [0,1]. Constant features get scale 1 and map
// to 0; values outside the fitted range clamp to the unit interval.
struct Normalizer {
    std::vector<std::string> feature_names;
    std::vector<double> mins;
    std::vector<double> maxs;

    Vector transform(const Vector& raw) const;
    Vector inverse(const Vector& normalized) const;

    std::string to_json() const;
    static Normalizer from_json(const std::string& text);
};

Normalizer fit_normalizer(const RawTable& table, const std::vector<std::size_t>& fit_rows);
Normalizer fit_normalizer(const RawTable& table);

enum class Split : int { train = 0, val = 1, test = 2 };

const char* split_name(Split s);

// Normalized dataset with evaluation labels, the labeled/unlabeled partition
// visible to training, and train/val/test tags. `ids` are stable row numbers
// from the source file so reports can reference original samples.
struct Dataset {
    Matrix X;
    std::vector<int> y;  // -1 when the source row had no label
    std::vector<std::size_t> labeled_idx;
    std::vector<std::size_t> unlabeled_idx;
    std::vector<Split> split;
    std::vector<std::size_t> ids;
    std::vector<std::string> feature_names;
    Normalizer normalizer;

    std::size_t size() const { return X.rows; }
    std::size_t n_features() const { return X.cols; }
    bool has_labels() const;
    Vector row(std::size_t i) const;
    bool is_labeled(std::size_t i) const;

    Dataset subset(Split s) const;
    Vector feature_means() const;                      // over all rows
    Vector feature_means(const std::vector<std::size_t>& rows) const;
    std::vector<std::size_t> rows_of(Split s) const;
};

// Build the normalized dataset. Rows whose label is present start in D_l;
// unlabeled rows go to D_u. All rows start tagged train.
Dataset normalize(const RawTable& table, const Normalizer& normalizer);

// Stratified train/val/test tags (by label where available; -1 forms its own
// stratum), seeded.
std::vector<Split> stratified_split_tags(const std::vector<int>& y, double train_frac,
                                         double val_frac, double test_frac, std::uint64_t seed);

// Stratified train/val/test assignment (by label where available), seeded.
void assign_splits(Dataset& ds, double train_frac, double val_frac, double test_frac,
                   std::uint64_t seed);

// Full ingest pipeline: load the CSV, assign stratified splits on the raw
// rows, fit the normalizer on training rows only, normalize everything, then
// restrict the labels visible to training to `labeled` ("all" or a count).
// Child seeds derive from the master seed ("split", "labels").
Dataset ingest_dataset(const std::string& csv_path, const SchemaConfig& schema,
                       double train_frac, double val_frac, double test_frac,
                       const std::string& labeled, std::uint64_t master_seed);

// Keep exactly n_labeled rows in D_l (class-stratified among the currently
// labeled ones); every other row moves to D_u with its label hidden from
// training but retained in y for evaluation.
Dataset make_semi_supervised_split(const Dataset& ds, std::size_t n_labeled, std::uint64_t seed);

// One training mini-batch. alpha is the per-row cross-entropy weight: lambda
// exactly on labeled rows, 0 elsewhere.
struct MiniBatch {
    Matrix X;
    std::vector<double> y;      // meaningful only where alpha > 0
    std::vector<double> alpha;
};

// Proportional labeled quota: round(batch_size * |D_l| / N), at least 1 when
// D_l is nonempty, never above batch_size.
std::size_t labeled_quota(std::size_t batch_size, std::size_t n_labeled, std::size_t n_total);

MiniBatch sample_batch(const Dataset& ds, std::size_t B_l, std::size_t B_u, double lambda,
                       SeededRng& rng);

// Normalized snapshot (one row per sample) plus the normalizer sidecar.
void write_snapshot_csv(const Dataset& ds, const std::string& path);
void write_normalizer_json(const Normalizer& n, const std::string& path);

}  // namespace xad
