#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xad/dataset.hpp"
#include "xad/shapley.hpp"
#include "xad/sscae.hpp"

namespace xad {

enum class SubsetDistribution { shapley_kernel, uniform_nonempty };

const char* subset_distribution_name(SubsetDistribution s);
SubsetDistribution subset_distribution_from_name(const std::string& name);

// Amortized Shapley explainer: one forward pass of a small MLP yields the full
// attribution vector, optionally projected so the efficiency identity
// sum(phi) = v(full) - v(empty) holds exactly.
struct ExplainerModel {
    std::vector<LayerParams> net;  // d -> hidden... -> d, linear output
    std::size_t d = 0;
    bool normalize = true;
    double v_empty = 0.0;                    // cached value of the empty coalition
    std::uint64_t explained_model_hash = 0;  // pairing guard
    ModelFn explained_fn;                    // rebound after load, never serialized
};

struct ExplainerTrainConfig {
    double lr = 1e-3;
    std::size_t steps = 50000;
    SubsetDistribution subset_distribution = SubsetDistribution::shapley_kernel;
    std::uint64_t seed = 0;
    std::size_t eval_n = 256;
    bool normalize = true;
    std::vector<std::size_t> hidden = {128, 128};
    bool use_adam = false;     // plain gradient descent by default
    std::size_t batch_draws = 1;  // (x, s) draws averaged per update
};

struct ExplainerDiagnostics {
    // Reconstruction forms: discrepancy between f(x) and sum(phi(x)).
    double cs = 0.0;
    double em = 0.0;
    // Coalition forms over fresh coalition draws.
    double cs_coalition = 0.0;
    double em_coalition = 0.0;
};

struct ExplainerTrainResult {
    ExplainerModel model;
    ExplainerDiagnostics diagnostics;
    std::vector<double> loss_history;  // squared residual per step
};

// Trains the surrogate on squared coalition residuals
// (v(s) - v(empty) - s^T phi)^2 with per-draw gradient updates, then computes
// CS/EM over eval_n held-out samples with fresh coalition draws.
ExplainerTrainResult train_explainer(const ModelFn& explained_fn, const Dataset& train,
                                     const Dataset& heldout, const ValueFunctionConfig& vcfg,
                                     const ExplainerTrainConfig& cfg);

// One forward pass (+ optional normalization step, which needs the explained
// model for v(full) = f(x)).
Attribution explain(const ExplainerModel& explainer, const Vector& x);

Vector explainer_raw_output(const ExplainerModel& explainer, const Vector& x);

// Efficiency projection: phi <- phi + (delta - sum(phi)) / d.
Vector normalize_efficiency(const Vector& phi, double delta);

// Mean absolute / squared gap between f(x) and the attribution-reconstructed
// output sum(phi(x)) over the given samples.
double confidence_score(const ExplainerModel& explainer, const std::vector<Vector>& samples);
double error_metric(const ExplainerModel& explainer, const std::vector<Vector>& samples);

std::string explainer_to_json(const ExplainerModel& model, const ExplainerTrainConfig& cfg,
                              const ExplainerDiagnostics& diag);
ExplainerModel explainer_from_json(const std::string& text,
                                   ExplainerDiagnostics* diag_out = nullptr);
void save_explainer(const std::string& path, const ExplainerModel& model,
                    const ExplainerTrainConfig& cfg, const ExplainerDiagnostics& diag);
ExplainerModel load_explainer(const std::string& path, ExplainerDiagnostics* diag_out = nullptr);

}  // namespace xad
