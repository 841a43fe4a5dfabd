#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "xad/errors.hpp"
#include "xad/fastshapc.hpp"

using namespace xad;

namespace {

// Centered linear fixture: features uniform in [-1,1], baseline at the exact
// mean (zero), so v(empty) = 0 and the closed-form Shapley value is w_i x_i.
struct CenteredLinear {
    std::size_t d;
    Vector w;
    Dataset data;
    ValueFunctionConfig vcfg;

    CenteredLinear(std::size_t dim, std::size_t rows, std::uint64_t seed) : d(dim) {
        SeededRng rng(seed);
        w.resize(d);
        for (double& v : w) v = rng.uniform(-2, 2);
        data.X = Matrix(rows, d);
        for (double& v : data.X.data) v = rng.uniform(-1, 1);
        data.y.assign(rows, -1);
        data.split.assign(rows, Split::train);
        data.ids.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            data.ids[i] = i;
            data.unlabeled_idx.push_back(i);
        }
        for (std::size_t j = 0; j < d; ++j) data.feature_names.push_back("f" + std::to_string(j));
        vcfg.mode = BaselineMode::mean_imputation;
        vcfg.baseline.assign(d, 0.0);
    }

    ModelFn fn() const {
        const Vector wc = w;
        return [wc](const Vector& v) { return dot(wc, v); };
    }
};

ExplainerModel identity_offset_explainer(double c) {
    // phi(x) = x - c/2 per feature, d = 2, so sum(phi) = f(x) - c for f = sum.
    ExplainerModel ex;
    ex.d = 2;
    ex.normalize = false;
    LayerParams l;
    l.W = Matrix::identity(2);
    l.b = {-c / 2.0, -c / 2.0};
    l.act = Activation::linear;
    ex.net.push_back(l);
    ex.explained_fn = [](const Vector& v) { return v[0] + v[1]; };
    return ex;
}

}  // namespace

TEST_SUITE("fastshapc") {

TEST_CASE("normalization projection is idempotent and hits the target sum") {
    SeededRng rng(3);
    for (int t = 0; t < 100; ++t) {
        Vector phi(6);
        for (double& v : phi) v = rng.uniform(-3, 3);
        const double delta = rng.uniform(-5, 5);
        const Vector once = normalize_efficiency(phi, delta);
        const Vector twice = normalize_efficiency(once, delta);
        double sum = 0.0;
        for (double v : once) sum += v;
        CHECK(std::abs(sum - delta) <= 1e-12);
        for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(once[j] - twice[j]) <= 1e-12);
    }
}

TEST_CASE("constant explained model trains to near-zero attributions") {
    CenteredLinear fx(6, 512, 7);
    const ModelFn constant = [](const Vector&) { return 3.0; };
    ExplainerTrainConfig cfg;
    cfg.steps = 60000;
    cfg.lr = 0.05;
    cfg.batch_draws = 8;
    cfg.seed = 11;
    cfg.normalize = true;
    cfg.hidden = {16};
    cfg.lr = 0.1;
    const ExplainerTrainResult r = train_explainer(constant, fx.data, Dataset{}, fx.vcfg, cfg);
    double mean_abs = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Attribution a = explain(r.model, fx.data.row(static_cast<std::size_t>(t)));
        for (double p : a.phi) mean_abs += std::abs(p);
    }
    mean_abs /= 50.0 * 6.0;
    CHECK(mean_abs < 1e-3);
}

TEST_CASE("trained explainer approximates exact shapley on the linear fixture") {
    CenteredLinear fx(8, 32768, 21);
    ExplainerTrainConfig cfg;
    cfg.steps = 100000;
    cfg.lr = 0.05;
    cfg.batch_draws = 8;
    cfg.seed = 5;
    cfg.normalize = true;
    const ExplainerTrainResult r = train_explainer(fx.fn(), fx.data, Dataset{}, fx.vcfg, cfg);

    SeededRng rng(6);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        Vector x(8);
        for (double& v : x) v = rng.uniform(-1, 1);
        const Attribution a = explain(r.model, x);
        for (std::size_t j = 0; j < 8; ++j)
            worst = std::max(worst, std::abs(a.phi[j] - fx.w[j] * x[j]));
    }
    CHECK(worst <= 0.05);
    CHECK(r.diagnostics.cs <= 0.05);
    CHECK(r.diagnostics.em <= 0.05);
    CHECK(r.diagnostics.cs_coalition <= 0.2);
    // Jensen: mean absolute gap is bounded by the root mean square gap.
    CHECK(r.diagnostics.cs <= std::sqrt(r.diagnostics.em) + 1e-12);
}

TEST_CASE("training loss running mean is non-increasing by the end") {
    CenteredLinear fx(6, 128, 33);
    ExplainerTrainConfig cfg;
    cfg.steps = 6000;
    cfg.seed = 9;
    const ExplainerTrainResult r = train_explainer(fx.fn(), fx.data, Dataset{}, fx.vcfg, cfg);
    REQUIRE(r.loss_history.size() == 6000);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < 500; ++i) {
        head += r.loss_history[i];
        tail += r.loss_history[r.loss_history.size() - 1 - i];
    }
    CHECK(tail <= head);
}

TEST_CASE("normalize on: efficiency holds for every explanation") {
    CenteredLinear fx(7, 64, 41);
    ExplainerTrainConfig cfg;
    cfg.steps = 2000;
    cfg.seed = 13;
    cfg.normalize = true;
    const ExplainerTrainResult r = train_explainer(fx.fn(), fx.data, Dataset{}, fx.vcfg, cfg);
    SeededRng rng(14);
    const double v_empty = r.model.v_empty;
    for (int t = 0; t < 1000; ++t) {
        Vector x(7);
        for (double& v : x) v = rng.uniform(-1, 1);
        const Attribution a = explain(r.model, x);
        double sum = 0.0;
        for (double p : a.phi) sum += p;
        const double v_full = fx.fn()(x);
        CHECK(std::abs(sum - (v_full - v_empty)) <= 1e-9);
    }
}

TEST_CASE("normalize off: efficiency generally fails") {
    CenteredLinear fx(7, 64, 43);
    ExplainerTrainConfig cfg;
    cfg.steps = 300;  // deliberately undertrained
    cfg.seed = 15;
    cfg.normalize = false;
    const ExplainerTrainResult r = train_explainer(fx.fn(), fx.data, Dataset{}, fx.vcfg, cfg);
    SeededRng rng(16);
    int violations = 0;
    for (int t = 0; t < 100; ++t) {
        Vector x(7);
        for (double& v : x) v = rng.uniform(-1, 1);
        const Attribution a = explain(r.model, x);
        double sum = 0.0;
        for (double p : a.phi) sum += p;
        if (std::abs(sum - fx.fn()(x)) > 1e-9) ++violations;
    }
    CHECK(violations > 90);
}

TEST_CASE("frozen explainer output is deterministic") {
    CenteredLinear fx(5, 32, 51);
    ExplainerTrainConfig cfg;
    cfg.steps = 500;
    cfg.seed = 17;
    const ExplainerTrainResult r = train_explainer(fx.fn(), fx.data, Dataset{}, fx.vcfg, cfg);
    const Vector x = {0.3, -0.4, 0.9, 0.0, -0.7};
    const Attribution a = explain(r.model, x);
    const Attribution b = explain(r.model, x);
    CHECK(a.phi == b.phi);
}

TEST_CASE("explain rejects dimension mismatch") {
    CenteredLinear fx(4, 16, 61);
    ExplainerTrainConfig cfg;
    cfg.steps = 50;
    cfg.seed = 19;
    const ExplainerTrainResult r = train_explainer(fx.fn(), fx.data, Dataset{}, fx.vcfg, cfg);
    CHECK_THROWS_AS(explain(r.model, Vector(5, 0.0)), DimensionError);
}

TEST_CASE("confidence score and error metric fixed points") {
    // Perfect explainer: phi = x elementwise for f = sum, c = 0.
    const ExplainerModel perfect = identity_offset_explainer(0.0);
    const std::vector<Vector> xs = {{0.1, 0.2}, {0.5, -0.3}, {0.9, 0.4}};
    CHECK(confidence_score(perfect, xs) <= 1e-15);
    CHECK(error_metric(perfect, xs) <= 1e-15);

    // Constant offset c: CS = |c|, EM = c^2.
    const double c = 0.37;
    const ExplainerModel off = identity_offset_explainer(c);
    CHECK(confidence_score(off, xs) == doctest::Approx(c).epsilon(1e-12));
    CHECK(error_metric(off, xs) == doctest::Approx(c * c).epsilon(1e-12));
    CHECK(confidence_score(off, xs) <= std::sqrt(error_metric(off, xs)) + 1e-12);
}

TEST_CASE("explainer persistence round-trips") {
    CenteredLinear fx(5, 32, 71);
    ExplainerTrainConfig cfg;
    cfg.steps = 400;
    cfg.seed = 23;
    ExplainerTrainResult r = train_explainer(fx.fn(), fx.data, Dataset{}, fx.vcfg, cfg);
    r.model.explained_model_hash = 0xdeadbeef;
    save_explainer("explainer_test.json", r.model, cfg, r.diagnostics);
    ExplainerDiagnostics diag;
    ExplainerModel loaded = load_explainer("explainer_test.json", &diag);
    std::remove("explainer_test.json");
    CHECK(loaded.d == r.model.d);
    CHECK(loaded.explained_model_hash == 0xdeadbeef);
    CHECK(diag.cs == r.diagnostics.cs);
    CHECK(diag.em_coalition == r.diagnostics.em_coalition);
    loaded.explained_fn = fx.fn();
    const Vector x = {0.1, 0.2, -0.3, 0.4, 0.0};
    CHECK(explain(loaded, x).phi == explain(r.model, x).phi);
}

TEST_CASE("uniform-nonempty subset distribution trains too") {
    CenteredLinear fx(6, 64, 81);
    ExplainerTrainConfig cfg;
    cfg.steps = 4000;
    cfg.seed = 29;
    cfg.subset_distribution = SubsetDistribution::uniform_nonempty;
    const ExplainerTrainResult r = train_explainer(fx.fn(), fx.data, Dataset{}, fx.vcfg, cfg);
    CHECK(std::isfinite(r.diagnostics.em));
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < 500; ++i) {
        head += r.loss_history[i];
        tail += r.loss_history[r.loss_history.size() - 1 - i];
    }
    CHECK(tail <= head);
}

}
