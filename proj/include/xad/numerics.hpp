#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace xad {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. All public operations leave only
// finite entries behind; violations throw NumericError.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, data.size() == rows * cols

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Matrix identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::string shape_str() const;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Vector matvec(const Matrix& m, const Vector& v);

void check_finite(const Matrix& m, const char* what);
void check_finite(const Vector& v, const char* what);

// Elementwise activations. The ReLU subgradient at 0 is 0.
Vector relu(const Vector& v);
Vector relu_prime(const Vector& v);

// Logistic function clamped to [1e-12, 1 - 1e-12] so downstream logs stay finite.
double sigmoid(double x);

double dot(const Vector& a, const Vector& b);
double l2_norm(const Vector& v);
double squared_distance(const Vector& a, const Vector& b);

// Adam moment accumulators over one flat parameter vector.
struct AdamState {
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<double> m;  // first moment, same size as the parameter vector
    std::vector<double> v;  // second moment

    explicit AdamState(std::size_t n_params = 0, double b1 = 0.9, double b2 = 0.999,
                       double eps = 1e-8);
};

// One bias-corrected Adam update in place; increments state.step.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, double lr);

// Allocation-free kernel behind adam_step, for callers that keep their own
// moment buffers; `step` is the post-increment step count.
void adam_step_raw(double* params, const double* grads, double* m, double* v, std::size_t n,
                   std::size_t step, double beta1, double beta2, double epsilon, double lr);

// Deterministic PRNG with a platform-independent sequence. The generator is
// xoshiro256** seeded through SplitMix64; both recurrences are written out in
// README.md so the sequence can be reproduced from the documentation alone.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64();

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01();
    // Uniform double in [lo, hi).
    double uniform(double lo, double hi);
    // Unbiased uniform integer in [0, bound).
    std::uint64_t uniform_int(std::uint64_t bound);
    // Standard normal via Box-Muller (no cached spare, so the draw count per
    // call is fixed).
    double gaussian();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    // k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

// Deterministic derivation of per-stage child seeds from one master seed:
// child = splitmix64(master ^ fnv1a64(label)). Documented in README.md.
std::uint64_t derive_seed(std::uint64_t master, const std::string& label);

// FNV-1a 64-bit hash (non-cryptographic, used for config/artifact hashes).
std::uint64_t fnv1a64(const void* bytes, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

// Fixed-format double rendering with round-trip precision, used everywhere a
// numeric value lands in a CSV so outputs stay byte-stable across runs.
std::string format_double(double x);

}  // namespace xad
