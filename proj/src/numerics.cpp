#include "xad/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "xad/errors.hpp"

namespace xad {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

void check_finite(const Matrix& m, const char* what) {
    for (double x : m.data) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string(what) + ": non-finite entry in " + m.shape_str() +
                               " matrix");
        }
    }
}

void check_finite(const Vector& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string(what) + ": non-finite entry in vector of length " +
                               std::to_string(v.size()));
        }
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw DimensionError("matmul: incompatible shapes " + a.shape_str() + " and " +
                             b.shape_str());
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = &b.data[k * b.cols];
            double* orow = &out.data[i * out.cols];
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    check_finite(out, "matmul");
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
    return out;
}

Vector matvec(const Matrix& m, const Vector& v) {
    if (m.cols != v.size()) {
        throw DimensionError("matvec: incompatible shapes " + m.shape_str() + " and vector " +
                             std::to_string(v.size()));
    }
    Vector out(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = &m.data[i * m.cols];
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

Vector relu(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
    return out;
}

Vector relu_prime(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? 1.0 : 0.0;
    return out;
}

double sigmoid(double x) {
    double s;
    if (x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    return std::clamp(s, 1e-12, 1.0 - 1e-12);
}

double dot(const Vector& a, const Vector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double l2_norm(const Vector& v) { return std::sqrt(dot(v, v)); }

double squared_distance(const Vector& a, const Vector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

AdamState::AdamState(std::size_t n_params, double b1, double b2, double eps)
    : beta1(b1), beta2(b2), epsilon(eps), m(n_params, 0.0), v(n_params, 0.0) {}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size() ||
        params.size() != state.v.size()) {
        throw DimensionError("adam_step: parameter/gradient/moment sizes disagree (" +
                             std::to_string(params.size()) + ", " + std::to_string(grads.size()) +
                             ", " + std::to_string(state.m.size()) + ")");
    }
    state.step += 1;
    adam_step_raw(params.data(), grads.data(), state.m.data(), state.v.data(), params.size(),
                  state.step, state.beta1, state.beta2, state.epsilon, lr);
}

void adam_step_raw(double* params, const double* grads, double* m, double* v, std::size_t n,
                   std::size_t step, double beta1, double beta2, double epsilon, double lr) {
    const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        // Moments decaying through long zero-gradient streaks land in the
        // denormal range and wreck throughput; flush them to zero.
        if (std::abs(m[i]) < 1e-300) m[i] = 0.0;
        if (v[i] < 1e-300) v[i] = 0.0;
        const double mhat = m[i] / bias1;
        const double vhat = v[i] / bias2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + epsilon);
    }
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& w : s_) w = splitmix64(s);
}

std::uint64_t SeededRng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double SeededRng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t SeededRng::uniform_int(std::uint64_t bound) {
    if (bound == 0) throw NumericError("uniform_int: bound must be positive");
    // Lemire's multiply-shift rejection method: unbiased and deterministic.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    std::uint64_t l = static_cast<std::uint64_t>(m);
    if (l < bound) {
        const std::uint64_t t = (0 - bound) % bound;
        while (l < t) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * bound;
            l = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double SeededRng::gaussian() {
    // Box-Muller with a guarded log argument; the spare value is discarded.
    double u1 = uniform01();
    const double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::vector<std::size_t> SeededRng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) {
        throw NumericError("sample_without_replacement: k=" + std::to_string(k) + " exceeds n=" +
                           std::to_string(n));
    }
    // Partial Fisher-Yates over an index table.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_int(n - i));
        std::swap(idx[i], idx[j]);
        out[i] = idx[i];
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& label) {
    std::uint64_t s = master ^ fnv1a64(label);
    return splitmix64(s);
}

std::uint64_t fnv1a64(const void* bytes, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace xad
