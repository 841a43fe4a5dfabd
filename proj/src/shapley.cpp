#include "xad/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "xad/errors.hpp"

namespace xad {

namespace {

double factorial(std::size_t n) {
    double f = 1.0;
    for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

Vector compose_input(const Vector& x, const std::vector<char>& bits, const Vector& fill) {
    Vector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = bits[j] ? x[j] : fill[j];
    return out;
}

}  // namespace

CoalitionMask CoalitionMask::from_u32(std::size_t d, std::uint32_t mask) {
    CoalitionMask m;
    m.d = d;
    m.bits.assign(d, 0);
    for (std::size_t j = 0; j < d; ++j) m.bits[j] = (mask >> j) & 1u;
    return m;
}

std::size_t CoalitionMask::count() const {
    std::size_t c = 0;
    for (char b : bits) c += b != 0;
    return c;
}

const char* attribution_method_name(AttributionMethod m) {
    switch (m) {
        case AttributionMethod::exact: return "exact";
        case AttributionMethod::montecarlo: return "montecarlo";
        case AttributionMethod::kernel: return "kernel";
        default: return "fastshap_c";
    }
}

AttributionMethod attribution_method_from_name(const std::string& name) {
    if (name == "exact") return AttributionMethod::exact;
    if (name == "montecarlo") return AttributionMethod::montecarlo;
    if (name == "kernel") return AttributionMethod::kernel;
    if (name == "fastshap_c") return AttributionMethod::fastshap_c;
    throw ConfigError("unknown attribution method: " + name);
}

double value_function(const ModelFn& model_fn, const Vector& x, const CoalitionMask& mask,
                      const ValueFunctionConfig& cfg, SeededRng* rng) {
    if (mask.bits.size() != x.size())
        throw DimensionError("value_function: mask length " + std::to_string(mask.bits.size()) +
                             " does not match input length " + std::to_string(x.size()));
    if (cfg.mode == BaselineMode::mean_imputation) {
        if (cfg.baseline.size() != x.size())
            throw DimensionError("value_function: baseline length does not match input");
        return model_fn(compose_input(x, mask.bits, cfg.baseline));
    }
    if (cfg.background == nullptr || cfg.background->rows == 0)
        throw DataError("value_function: background-sampling mode needs a nonempty background");
    if (cfg.K == 0) throw ConfigError("value_function: K must be at least 1");
    if (rng == nullptr)
        throw ConfigError("value_function: background-sampling mode needs an RNG");
    const Matrix& bg = *cfg.background;
    double acc = 0.0;
    Vector fill(x.size());
    for (std::size_t k = 0; k < cfg.K; ++k) {
        const std::size_t r = static_cast<std::size_t>(rng->uniform_int(bg.rows));
        for (std::size_t j = 0; j < x.size(); ++j) fill[j] = bg(r, j);
        acc += model_fn(compose_input(x, mask.bits, fill));
    }
    return acc / static_cast<double>(cfg.K);
}

Attribution exact_shapley(const ModelFn& model_fn, const Vector& x,
                          const ValueFunctionConfig& cfg) {
    const std::size_t d = x.size();
    if (d == 0) throw DataError("exact_shapley: empty input");
    if (d > 15)
        throw ConfigError("exact_shapley: d=" + std::to_string(d) +
                          " exceeds the enumeration guard (15)");

    const std::uint32_t n_masks = 1u << d;
    std::vector<double> v(n_masks);
    for (std::uint32_t m = 0; m < n_masks; ++m)
        v[m] = value_function(model_fn, x, CoalitionMask::from_u32(d, m), cfg);

    // Per-size coalition weight |S|!(d-|S|-1)!/d!.
    std::vector<double> w(d);
    const double dfact = factorial(d);
    for (std::size_t s = 0; s < d; ++s) w[s] = factorial(s) * factorial(d - s - 1) / dfact;

    Attribution out;
    out.method = AttributionMethod::exact;
    out.meta.samples = n_masks;
    out.phi.assign(d, 0.0);
    for (std::uint32_t m = 0; m < n_masks; ++m) {
        const std::size_t size = static_cast<std::size_t>(__builtin_popcount(m));
        for (std::size_t i = 0; i < d; ++i) {
            if (m & (1u << i)) continue;  // sum runs over coalitions without i
            out.phi[i] += w[size] * (v[m | (1u << i)] - v[m]);
        }
    }
    check_finite(out.phi, "exact_shapley");
    return out;
}

Attribution mc_shapley(const ModelFn& model_fn, const Vector& x, std::size_t M, SeededRng& rng,
                       const ValueFunctionConfig& cfg) {
    const std::size_t d = x.size();
    if (M == 0) throw ConfigError("mc_shapley: M must be at least 1");
    Attribution out;
    out.method = AttributionMethod::montecarlo;
    out.meta.samples = M;
    out.meta.seed = rng.seed();
    out.phi.assign(d, 0.0);

    CoalitionMask mask;
    mask.d = d;
    mask.bits.assign(d, 0);
    const double inv_m = 1.0 / static_cast<double>(M);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t j = 0; j < d; ++j)
            mask.bits[j] = static_cast<char>(rng.next_u64() & 1u);
        const double v_s = value_function(model_fn, x, mask, cfg);
        for (std::size_t i = 0; i < d; ++i) {
            mask.bits[i] ^= 1;
            const double v_flip = value_function(model_fn, x, mask, cfg);
            const char now_present = mask.bits[i];
            mask.bits[i] ^= 1;
            // With i absent from S the contribution is v(S u {i}) - v(S);
            // with i present it is v(S) - v(S \ {i}).
            const double delta = now_present ? (v_flip - v_s) : (v_s - v_flip);
            out.phi[i] += delta * inv_m;
        }
    }
    check_finite(out.phi, "mc_shapley");
    return out;
}

double shapley_kernel_weight(std::size_t d, std::size_t k) {
    if (k == 0 || k >= d) throw ConfigError("shapley kernel weight undefined for |S|=0 or |S|=d");
    double binom = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        binom = binom * static_cast<double>(d - k + i) / static_cast<double>(i);
    return static_cast<double>(d - 1) /
           (binom * static_cast<double>(k) * static_cast<double>(d - k));
}

Vector solve_linear(Matrix a, Vector b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) throw DimensionError("solve_linear: shape mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (std::abs(a(pivot, col)) < 1e-14)
            throw NumericError("solve_linear: singular system");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) * inv;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    Vector x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
        x[i] = acc / a(i, i);
    }
    return x;
}

Attribution kernel_shapley(const ModelFn& model_fn, const Vector& x, std::size_t n_samples,
                           SeededRng& rng, const ValueFunctionConfig& cfg) {
    const std::size_t d = x.size();
    if (d < 2) throw DataError("kernel_shapley: needs at least two features");
    if (n_samples < d + 2)
        throw ConfigError("kernel_shapley: n_samples must be at least d+2 = " +
                          std::to_string(d + 2));

    const double v_empty = value_function(model_fn, x, CoalitionMask::empty(d), cfg);
    const double v_full = value_function(model_fn, x, CoalitionMask::full(d), cfg);

    // (mask, weight, v(S)) triples; duplicates merge by weight accumulation.
    struct Row {
        std::vector<char> bits;
        double weight;
        double value;
    };
    std::vector<Row> rows;

    const bool enumerate = d <= 25 && n_samples >= ((1ull << d) - 2);
    if (enumerate) {
        for (std::uint32_t m = 1; m + 1 < (1u << d); ++m) {
            const CoalitionMask mask = CoalitionMask::from_u32(d, m);
            rows.push_back({mask.bits, shapley_kernel_weight(d, mask.count()),
                            value_function(model_fn, x, mask, cfg)});
        }
    } else {
        // Sample coalition sizes from the kernel size distribution, then a
        // uniform subset of that size; the empirical distribution already
        // carries the kernel weighting, so samples get unit weight.
        std::vector<double> size_cdf(d - 1);
        double total = 0.0;
        for (std::size_t k = 1; k < d; ++k) {
            total += 1.0 / (static_cast<double>(k) * static_cast<double>(d - k));
            size_cdf[k - 1] = total;
        }
        std::map<std::vector<char>, std::pair<double, double>> merged;
        for (std::size_t s = 0; s < n_samples; ++s) {
            const double u = rng.uniform01() * total;
            std::size_t k = 1;
            while (k < d - 1 && u > size_cdf[k - 1]) ++k;
            std::vector<char> bits(d, 0);
            for (const std::size_t j : rng.sample_without_replacement(d, k)) bits[j] = 1;
            auto it = merged.find(bits);
            if (it == merged.end()) {
                CoalitionMask mask{d, bits};
                merged[bits] = {1.0, value_function(model_fn, x, mask, cfg)};
            } else {
                it->second.first += 1.0;
            }
        }
        for (auto& [bits, wv] : merged) rows.push_back({bits, wv.first, wv.second});
    }

    // Constrained weighted least squares via the KKT system:
    //   [2A  1][phi]   [2c    ]        A = sum w s s^T,  c = sum w s (v(S)-v0)
    //   [1^T 0][mu ] = [v1-v0 ]
    Matrix A(d, d);
    Vector c(d, 0.0);
    for (const Row& row : rows) {
        const double y = row.value - v_empty;
        for (std::size_t i = 0; i < d; ++i) {
            if (!row.bits[i]) continue;
            c[i] += row.weight * y;
            for (std::size_t j = 0; j < d; ++j)
                if (row.bits[j]) A(i, j) += row.weight;
        }
    }

    Attribution out;
    out.method = AttributionMethod::kernel;
    out.meta.samples = rows.size();
    out.meta.seed = rng.seed();

    auto build_and_solve = [&](double ridge) {
        Matrix kkt(d + 1, d + 1);
        Vector rhs(d + 1, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) kkt(i, j) = 2.0 * A(i, j);
            kkt(i, i) += 2.0 * ridge;
            kkt(i, d) = 1.0;
            kkt(d, i) = 1.0;
            rhs[i] = 2.0 * c[i];
        }
        rhs[d] = v_full - v_empty;
        return solve_linear(std::move(kkt), std::move(rhs));
    };

    Vector solution;
    try {
        solution = build_and_solve(0.0);
    } catch (const NumericError&) {
        solution = build_and_solve(1e-10);
        out.meta.ridged = true;
    }
    out.phi.assign(solution.begin(), solution.begin() + d);
    check_finite(out.phi, "kernel_shapley");
    return out;
}

GlobalShapley global_shapley(const std::vector<Attribution>& attributions) {
    if (attributions.empty()) throw DataError("global_shapley: no attributions");
    const std::size_t d = attributions.front().phi.size();
    GlobalShapley g;
    g.mean_phi.assign(d, 0.0);
    g.mean_abs_phi.assign(d, 0.0);
    for (const auto& a : attributions) {
        if (a.phi.size() != d)
            throw DimensionError("global_shapley: attributions have mixed dimensions");
        for (std::size_t j = 0; j < d; ++j) {
            g.mean_phi[j] += a.phi[j];
            g.mean_abs_phi[j] += std::abs(a.phi[j]);
        }
    }
    const double inv = 1.0 / static_cast<double>(attributions.size());
    for (std::size_t j = 0; j < d; ++j) {
        g.mean_phi[j] *= inv;
        g.mean_abs_phi[j] *= inv;
    }
    return g;
}

void write_attribution_csv(const std::string& path, const std::vector<std::size_t>& sample_ids,
                           const std::vector<std::string>& feature_names,
                           const std::vector<Attribution>& attributions) {
    if (sample_ids.size() != attributions.size())
        throw DimensionError("write_attribution_csv: ids and attributions disagree");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write attribution report: " + path);
    out << "sample_id,feature,phi,method\n";
    for (std::size_t k = 0; k < attributions.size(); ++k) {
        const auto& a = attributions[k];
        for (std::size_t j = 0; j < a.phi.size(); ++j) {
            out << sample_ids[k] << ',' << feature_names[j] << ',' << format_double(a.phi[j])
                << ',' << attribution_method_name(a.method) << '\n';
        }
    }
}

}  // namespace xad
