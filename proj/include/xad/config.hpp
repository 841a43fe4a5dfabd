#pragma once

#include <map>
#include <string>
#include <vector>

#include "xad/anomaly.hpp"
#include "xad/fastshapc.hpp"
#include "xad/sscae.hpp"

namespace xad {

// Flat key-value configuration with [section] headers; '#' starts a comment.
// Flag overrides use the dotted form section.key=value.
class KvConfig {
public:
    static KvConfig from_file(const std::string& path);
    static KvConfig from_string(const std::string& text);

    void set(const std::string& dotted_key, const std::string& value);
    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;

    // Canonical sorted rendering; equal effective configurations hash equal.
    std::string canonical_string() const;
    std::string pretty_string() const;

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
};

// Fully-resolved, validated run configuration.
struct RunConfig {
    // [data]
    std::string csv_path = "data/ue.csv";
    std::string schema_path = "data/schema.cfg";
    double train_frac = 0.70;
    double val_frac = 0.15;
    double test_frac = 0.15;
    std::string labeled = "all";  // "all" or an integer budget
    std::uint64_t seed = 7;

    TrainConfig train;
    ScoreConfig score;
    ExplainerTrainConfig explainer;

    // [explain]
    std::string explain_method = "fastshap_c";
    std::size_t explain_samples = 500;
    std::size_t mc_draws = 10000;
    std::size_t kernel_samples = 512;
    std::string explain_target = "score";  // "score" or "yhat"

    // [eval]
    std::vector<double> kappa_grid = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    double sensitivity_eps = 0.05;
    std::size_t sensitivity_draws = 16;
    std::size_t sensitivity_samples = 32;
    std::size_t agreement_samples = 500;

    std::string out_dir;  // empty: derive from timestamp + config hash
};

// Validates every field against its module's constraints; all violations are
// reported together in one ConfigError.
RunConfig resolve_config(const KvConfig& kv);

// Rendering of the resolved configuration (echoed into the run directory).
std::string render_config(const RunConfig& cfg);

std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace xad
