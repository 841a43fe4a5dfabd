#include <doctest.h>

#include <cmath>

#include "xad/errors.hpp"
#include "xad/evalx.hpp"

using namespace xad;

namespace {

// Linear decision fixture with a known importance ordering and labels that
// coincide with the full model's decisions.
struct CurveFixture {
    Vector w = {5.0, 3.0, 1.0, 0.5, 0.25, 0.1};
    Vector baseline = Vector(6, 0.5);
    double tau = 0.0;  // set so classes are balanced-ish
    std::vector<Vector> xs;
    std::vector<int> labels;
    std::vector<Vector> exact_phis;
    std::vector<Vector> random_phis;

    explicit CurveFixture(std::size_t n, std::uint64_t seed) {
        SeededRng rng(seed);
        double mean_score = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Vector x(6);
            for (double& v : x) v = rng.uniform01();
            mean_score += dot(w, x);
            xs.push_back(x);
        }
        tau = mean_score / static_cast<double>(n);
        for (const auto& x : xs) {
            labels.push_back(decide()(x));
            Vector phi(6);
            for (std::size_t j = 0; j < 6; ++j) phi[j] = w[j] * (x[j] - baseline[j]);
            exact_phis.push_back(phi);
            Vector rnd(6);
            for (double& v : rnd) v = rng.uniform(-1, 1);
            random_phis.push_back(rnd);
        }
    }

    DecisionFn decide() const {
        const Vector wc = w;
        const double t = tau;
        return [wc, t](const Vector& x) { return dot(wc, x) > t ? 1 : 0; };
    }

    ProbFn prob() const {
        const Vector wc = w;
        const double t = tau;
        return [wc, t](const Vector& x) { return 1.0 / (1.0 + std::exp(-(dot(wc, x) - t))); };
    }
};

}  // namespace

TEST_SUITE("evalx") {

TEST_CASE("perfect separation maxes every metric") {
    const std::vector<double> scores = {0.9, 0.8, 0.7, 0.2, 0.1};
    const std::vector<int> labels = {1, 1, 1, 0, 0};
    const ClassificationReport r = classify_metrics(scores, labels, 0.5);
    CHECK(r.acc == 1.0);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.auc.value() == 1.0);
    CHECK(r.uar == 100.0);
}

TEST_CASE("predict-all-negative on imbalanced data: accuracy flatters, uar does not") {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        scores.push_back(0.0);
        labels.push_back(i < 25 ? 1 : 0);
    }
    const ClassificationReport r = classify_metrics(scores, labels, 1.0);
    CHECK(r.acc == 0.75);
    CHECK(r.uar == 50.0);
    CHECK(r.recall == 0.0);
    CHECK(r.precision == 0.0);
    CHECK(r.f1 == 0.0);
}

TEST_CASE("random scores give auc near one half") {
    SeededRng rng(31);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 4000; ++i) {
        scores.push_back(rng.uniform01());
        labels.push_back(rng.uniform01() < 0.3 ? 1 : 0);
    }
    const auto auc = roc_auc(scores, labels);
    CHECK(std::abs(auc.value() - 0.5) <= 0.05);
}

TEST_CASE("single-class labels leave auc absent") {
    const ClassificationReport r = classify_metrics({0.1, 0.9}, {0, 0}, 0.5);
    CHECK_FALSE(r.auc.has_value());
}

TEST_CASE("uar is invariant under class-preserving duplication") {
    const std::vector<double> scores = {0.9, 0.4, 0.8, 0.1};
    const std::vector<int> labels = {1, 0, 1, 0};
    const ClassificationReport base = classify_metrics(scores, labels, 0.5);
    std::vector<double> dup_scores = scores;
    std::vector<int> dup_labels = labels;
    for (int r = 0; r < 3; ++r) {
        dup_scores.push_back(0.9);
        dup_labels.push_back(1);
    }
    const ClassificationReport dup = classify_metrics(dup_scores, dup_labels, 0.5);
    CHECK(base.uar == dup.uar);
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
    SeededRng rng(33);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 500; ++i) {
        const double s = rng.uniform(-3, 3);
        scores.push_back(s);
        labels.push_back(rng.uniform01() < 1.0 / (1.0 + std::exp(-s)) ? 1 : 0);
    }
    std::vector<double> warped;
    for (double s : scores) warped.push_back(std::exp(2.0 * s) + 7.0);
    CHECK(roc_auc(scores, labels).value() ==
          doctest::Approx(roc_auc(warped, labels).value()).epsilon(1e-12));
}

TEST_CASE("curve endpoints are exact") {
    const CurveFixture fx(200, 41);
    const std::vector<double> grid = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    const CurveReport ex =
        exclusion_curve(fx.decide(), fx.prob(), fx.xs, fx.labels, fx.exact_phis, fx.baseline,
                        grid);
    const CurveReport inc =
        inclusion_curve(fx.decide(), fx.prob(), fx.xs, fx.labels, fx.exact_phis, fx.baseline,
                        grid);
    // Labels equal full-model decisions, so full accuracy is exactly 1.
    CHECK(ex.points.front().accuracy == 1.0);
    CHECK(inc.points.back().accuracy == 1.0);
    // Fully ablated input is the same constant prediction everywhere.
    const int base_decision = fx.decide()(fx.baseline);
    double base_acc = 0.0;
    for (const int y : fx.labels) base_acc += (y == base_decision) ? 1.0 : 0.0;
    base_acc /= static_cast<double>(fx.labels.size());
    CHECK(ex.points.back().accuracy == base_acc);
    CHECK(inc.points.front().accuracy == base_acc);
    // Log-odds of the unmodified input is exactly zero.
    CHECK(ex.points.front().log_odds == 0.0);
    CHECK(inc.points.back().log_odds == 0.0);
}

TEST_CASE("informative attributions beat random ones on both curves") {
    const CurveFixture fx(300, 43);
    const std::vector<double> grid = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    const CurveReport ex_exact =
        exclusion_curve(fx.decide(), fx.prob(), fx.xs, fx.labels, fx.exact_phis, fx.baseline,
                        grid);
    const CurveReport ex_rand =
        exclusion_curve(fx.decide(), fx.prob(), fx.xs, fx.labels, fx.random_phis, fx.baseline,
                        grid);
    // Removing the genuinely important features hurts at least as much.
    CHECK(ex_exact.points[3].accuracy <= ex_rand.points[3].accuracy);  // kappa = 30

    const CurveReport inc_exact =
        inclusion_curve(fx.decide(), fx.prob(), fx.xs, fx.labels, fx.exact_phis, fx.baseline,
                        grid);
    CHECK(inc_exact.points[3].accuracy >= 0.9 * inc_exact.points.back().accuracy);
    const CurveReport inc_rand =
        inclusion_curve(fx.decide(), fx.prob(), fx.xs, fx.labels, fx.random_phis, fx.baseline,
                        grid);
    CHECK(inc_exact.accuracy_auc >= inc_rand.accuracy_auc);
}

TEST_CASE("curves at shared kappa points agree across grid resolutions") {
    const CurveFixture fx(100, 47);
    const std::vector<double> coarse = {0, 50, 100};
    const std::vector<double> fine = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    const CurveReport a =
        exclusion_curve(fx.decide(), fx.prob(), fx.xs, fx.labels, fx.exact_phis, fx.baseline,
                        coarse);
    const CurveReport b =
        exclusion_curve(fx.decide(), fx.prob(), fx.xs, fx.labels, fx.exact_phis, fx.baseline,
                        fine);
    CHECK(a.points[0].accuracy == b.points[0].accuracy);
    CHECK(a.points[1].accuracy == b.points[5].accuracy);
    CHECK(a.points[2].accuracy == b.points[10].accuracy);
    CHECK(a.points[1].log_odds == b.points[5].log_odds);
}

TEST_CASE("trapezoid auc matches the analytic integral of a piecewise-linear curve") {
    // y = x on [0,1]: integral is exactly 1/2 on any grid.
    const std::vector<double> grid = {0.0, 0.1, 0.35, 0.5, 0.8, 1.0};
    std::vector<double> y = grid;
    CHECK(std::abs(trapezoid_auc(grid, y) - 0.5) <= 1e-9);
    // y = |2x - 1|: integral 1/2, kink exactly on a grid point.
    const std::vector<double> grid2 = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> y2;
    for (double g : grid2) y2.push_back(std::abs(2.0 * g - 1.0));
    CHECK(std::abs(trapezoid_auc(grid2, y2) - 0.5) <= 1e-9);
}

TEST_CASE("log odds of an ignored feature is exactly zero") {
    const ProbFn prob = [](const Vector& x) { return 0.2 + 0.6 * x[0]; };
    std::vector<Vector> xs = {{0.1, 0.9}, {0.8, 0.2}, {0.5, 0.5}};
    CHECK(log_odds_feature(prob, xs, 1, {0.5, 0.5}) == 0.0);
}

TEST_CASE("log odds is positive for a feature that supports every prediction") {
    // Probability of anomaly rises with feature 0; imputing it toward the
    // baseline weakens whichever outcome was predicted.
    const ProbFn prob = [](const Vector& x) {
        return 1.0 / (1.0 + std::exp(-6.0 * (x[0] - 0.5)));
    };
    std::vector<Vector> xs;
    SeededRng rng(51);
    for (int i = 0; i < 100; ++i) {
        const double v = rng.uniform01();
        xs.push_back({v < 0.5 ? v * 0.6 : 0.7 + 0.3 * v, rng.uniform01()});
    }
    CHECK(log_odds_feature(prob, xs, 0, {0.5, 0.5}) > 0.0);
}

TEST_CASE("log odds over a single sample equals the single log ratio") {
    const ProbFn prob = [](const Vector& x) { return 0.1 + 0.8 * x[0]; };
    const Vector x = {0.9};
    const Vector baseline = {0.5};
    const double p_orig = 0.1 + 0.8 * 0.9;
    const double p_mod = 0.1 + 0.8 * 0.5;
    const double expect = -std::log(p_mod / p_orig);
    CHECK(log_odds_feature(prob, {x}, 0, baseline) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sensitivity of a constant explainer is zero") {
    SeededRng rng(61);
    const auto fn = [](const Vector&) { return Vector{1.0, -2.0}; };
    CHECK(sensitivity(fn, {0.5, 0.5}, 0.05, 16, rng) == 0.0);
}

TEST_CASE("sensitivity of a linear explainer approaches its spectral norm") {
    // phi(x) = A x with A = diag(2, 1): operator norm 2.
    const auto fn = [](const Vector& x) { return Vector{2.0 * x[0], x[1]}; };
    SeededRng rng(63);
    const double lam = sensitivity(fn, {0.3, 0.7}, 0.05, 512, rng);
    CHECK(lam <= 2.0 + 1e-9);
    CHECK(lam >= 1.8);

    SeededRng r1(64), r2(64);
    CHECK(sensitivity(fn, {0.3, 0.7}, 0.05, 16, r1) ==
          sensitivity(fn, {0.3, 0.7}, 0.05, 16, r2));
}

TEST_CASE("top-1 agreement fixed points and tie handling") {
    std::vector<Vector> a = {{0.9, 0.1}, {0.2, 0.7}};
    CHECK(top1_agreement(a, a) == 1.0);
    std::vector<Vector> b = {{0.0, 1.0}, {1.0, 0.0}};
    CHECK(top1_agreement(a, b) == 0.0);
    // Ties resolve to the lower index on both sides.
    std::vector<Vector> t1 = {{0.5, 0.5}};
    std::vector<Vector> t2 = {{0.5, -0.5}};
    CHECK(top1_agreement(t1, t2) == 1.0);
    CHECK(top1_feature({0.3, -0.3, 0.1}) == 0);
}

TEST_CASE("rank_features orders by absolute value with stable ties") {
    const auto r = rank_features({0.1, -0.9, 0.9, 0.0});
    CHECK(r == std::vector<std::size_t>{1, 2, 0, 3});
}

}
