#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "xad/numerics.hpp"

namespace xad {

// Scalar model under explanation: maps a full feature vector to one output.
using ModelFn = std::function<double(const Vector&)>;

struct CoalitionMask {
    std::size_t d = 0;
    std::vector<char> bits;  // 1 = feature present

    static CoalitionMask empty(std::size_t d) { return {d, std::vector<char>(d, 0)}; }
    static CoalitionMask full(std::size_t d) { return {d, std::vector<char>(d, 1)}; }
    static CoalitionMask from_u32(std::size_t d, std::uint32_t mask);
    std::size_t count() const;
};

enum class BaselineMode { mean_imputation, background_sampling };

struct ValueFunctionConfig {
    BaselineMode mode = BaselineMode::mean_imputation;
    Vector baseline;                     // per-feature means (mean-imputation mode)
    const Matrix* background = nullptr;  // background rows (sampling mode)
    std::size_t K = 32;                  // background draws per evaluation
};

// v(S): features in S keep x's values, the rest come from the baseline or are
// averaged over K background draws.
double value_function(const ModelFn& model_fn, const Vector& x, const CoalitionMask& mask,
                      const ValueFunctionConfig& cfg, SeededRng* rng = nullptr);

enum class AttributionMethod { exact, montecarlo, kernel, fastshap_c };

const char* attribution_method_name(AttributionMethod m);
AttributionMethod attribution_method_from_name(const std::string& name);

struct Attribution {
    Vector phi;
    AttributionMethod method = AttributionMethod::exact;
    struct Meta {
        std::size_t samples = 0;
        std::uint64_t seed = 0;
        bool ridged = false;  // kernel regression needed ridge damping
    } meta;
};

// Exact enumeration over all 2^d coalitions (guarded to d <= 15).
Attribution exact_shapley(const ModelFn& model_fn, const Vector& x,
                          const ValueFunctionConfig& cfg);

// Monte-Carlo estimate from M uniformly sampled coalitions. The marginal
// contribution of feature i at coalition S is v(S u {i}) - v(S) when i is
// absent and v(S) - v(S \ {i}) when present, accumulated as phi_i += delta/M.
Attribution mc_shapley(const ModelFn& model_fn, const Vector& x, std::size_t M, SeededRng& rng,
                       const ValueFunctionConfig& cfg);

// Weighted least-squares fit over coalitions with Shapley-kernel weights and
// the efficiency constraint enforced exactly. Enumerates every proper
// nonempty coalition when n_samples allows, otherwise samples from the kernel
// distribution.
Attribution kernel_shapley(const ModelFn& model_fn, const Vector& x, std::size_t n_samples,
                           SeededRng& rng, const ValueFunctionConfig& cfg);

struct GlobalShapley {
    Vector mean_phi;
    Vector mean_abs_phi;  // summary-plot ranking signal
};

GlobalShapley global_shapley(const std::vector<Attribution>& attributions);

// Shapley kernel weight for one coalition size (0 < k < d).
double shapley_kernel_weight(std::size_t d, std::size_t k);

// Dense linear solve with partial pivoting (small systems only).
Vector solve_linear(Matrix a, Vector b);

void write_attribution_csv(const std::string& path, const std::vector<std::size_t>& sample_ids,
                           const std::vector<std::string>& feature_names,
                           const std::vector<Attribution>& attributions);

}  // namespace xad
