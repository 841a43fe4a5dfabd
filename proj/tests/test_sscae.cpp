#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "xad/errors.hpp"
#include "xad/sscae.hpp"

using namespace xad;

namespace {

// Independent finite-difference oracle over the flattened parameter vector.
double loss_at(const SSCaeModel& reference, const std::vector<double>& flat,
               const MiniBatch& batch, double lambda_c) {
    SSCaeModel m = reference;
    unflatten_params(m, flat);
    return loss_terms(m, batch, lambda_c).total;
}

std::vector<double> fd_gradient(const SSCaeModel& model, const MiniBatch& batch, double lambda_c,
                                double h) {
    std::vector<double> flat = flatten_params(model);
    std::vector<double> grad(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double keep = flat[i];
        flat[i] = keep + h;
        const double up = loss_at(model, flat, batch, lambda_c);
        flat[i] = keep - h;
        const double down = loss_at(model, flat, batch, lambda_c);
        flat[i] = keep;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

MiniBatch single_row_batch(const Vector& x, double y, double alpha) {
    MiniBatch b;
    b.X = Matrix(1, x.size());
    for (std::size_t j = 0; j < x.size(); ++j) b.X(0, j) = x[j];
    b.y = {y};
    b.alpha = {alpha};
    return b;
}

MiniBatch random_batch(std::size_t rows, std::size_t n, double lambda, SeededRng& rng) {
    MiniBatch b;
    b.X = Matrix(rows, n);
    for (double& v : b.X.data) v = rng.uniform01();
    b.y.assign(rows, 0.0);
    b.alpha.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; r += 2) {
        b.y[r] = rng.uniform01() < 0.5 ? 0.0 : 1.0;
        b.alpha[r] = lambda;
    }
    return b;
}

Dataset toy_dataset(std::size_t rows, std::size_t n, std::uint64_t seed) {
    SeededRng rng(seed);
    Dataset ds;
    ds.X = Matrix(rows, n);
    for (double& v : ds.X.data) v = rng.uniform01();
    ds.y.assign(rows, -1);
    ds.split.assign(rows, Split::train);
    ds.ids.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        ds.ids[i] = i;
        if (i % 4 == 0) {
            ds.y[i] = (ds.X(i, 0) > 0.5) ? 1 : 0;
            ds.labeled_idx.push_back(i);
        } else {
            ds.unlabeled_idx.push_back(i);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        ds.feature_names.push_back("f" + std::to_string(j));
        ds.normalizer.feature_names.push_back("f" + std::to_string(j));
        ds.normalizer.mins.push_back(0.0);
        ds.normalizer.maxs.push_back(1.0);
    }
    return ds;
}

}  // namespace

TEST_SUITE("sscae") {

TEST_CASE("reference architecture has exactly 8180 encoder+decoder parameters") {
    const SSCaeModel m = make_reference_model(1);
    CHECK(trainable_params(m) == 8180);
    CHECK(m.latent_dim < m.input_dim);
}

TEST_CASE("reference architecture shapes") {
    SeededRng rng(5);
    Vector x(20);
    for (double& v : x) v = rng.uniform01();
    const SSCaeModel m = make_reference_model(2);
    const ForwardTrace t = forward(m, x);
    CHECK(t.z().size() == 16);
    CHECK(t.xhat().size() == 20);
    CHECK(t.yhat > 0.0);
    CHECK(t.yhat < 1.0);
}

TEST_CASE("zero-parameter model collapses to zeros / sigmoid midpoint") {
    SSCaeModel m = make_model(3, {4, 2}, {4, 3}, Activation::relu, Activation::sigmoid, 3);
    for (auto& l : m.encoder) {
        std::fill(l.W.data.begin(), l.W.data.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    for (auto& l : m.decoder) {
        std::fill(l.W.data.begin(), l.W.data.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    const ForwardTrace t = forward(m, {0.3, 0.7, 0.1});
    for (double z : t.z()) CHECK(z == 0.0);
    for (double v : t.xhat()) CHECK(v == 0.5);

    m.decoder.back().act = Activation::linear;
    const ForwardTrace t2 = forward(m, {0.3, 0.7, 0.1});
    for (double v : t2.xhat()) CHECK(v == 0.0);
}

TEST_CASE("identity linear encoder/decoder reconstructs exactly") {
    SSCaeModel m = make_model(3, {3}, {3}, Activation::linear, Activation::linear, 4);
    m.encoder[0].W = Matrix::identity(3);
    std::fill(m.encoder[0].b.begin(), m.encoder[0].b.end(), 0.0);
    m.decoder[0].W = Matrix::identity(3);
    std::fill(m.decoder[0].b.begin(), m.decoder[0].b.end(), 0.0);
    const Vector x = {0.2, -0.4, 1.7};
    const ForwardTrace t = forward(m, x);
    CHECK(t.xhat() == x);
}

TEST_CASE("forward rejects wrong input size") {
    const SSCaeModel m = make_reference_model(6);
    CHECK_THROWS_AS(forward(m, Vector(7, 0.0)), DimensionError);
}

TEST_CASE("encoder jacobian of a single linear layer is its weight matrix") {
    SSCaeModel m = make_model(4, {3}, {4}, Activation::linear, Activation::linear, 7);
    const Matrix j = encoder_jacobian(m, {0.1, 0.2, 0.3, 0.4});
    CHECK(j.rows == 3);
    CHECK(j.cols == 4);
    CHECK(j.data == m.encoder[0].W.data);
}

TEST_CASE("encoder jacobian vanishes when every relu unit is dead") {
    SSCaeModel m = make_model(4, {5, 2}, {5, 4}, Activation::relu, Activation::sigmoid, 8);
    for (auto& l : m.encoder) std::fill(l.b.begin(), l.b.end(), -10.0);
    const Matrix j = encoder_jacobian(m, {0.1, 0.2, 0.3, 0.4});
    for (double v : j.data) CHECK(v == 0.0);
}

TEST_CASE("encoder jacobian matches finite differences away from relu kinks") {
    const double h = 1e-6;
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 5 && seed < 200; ++seed) {
        const SSCaeModel m =
            make_model(6, {8, 4}, {8, 6}, Activation::relu, Activation::sigmoid, 40 + seed);
        SeededRng rng(900 + seed);
        Vector x(6);
        for (double& v : x) v = rng.uniform01();
        const ForwardTrace t = forward(m, x);
        bool clear_of_kinks = true;
        for (const auto& pre : t.enc_pre)
            for (double a : pre) clear_of_kinks &= std::abs(a) > 1e-3;
        if (!clear_of_kinks) continue;
        ++checked;

        const Matrix j = encoder_jacobian(m, x);
        for (std::size_t col = 0; col < 6; ++col) {
            Vector xp = x, xm = x;
            xp[col] += h;
            xm[col] -= h;
            const Vector zp = forward(m, xp).z();
            const Vector zm = forward(m, xm).z();
            for (std::size_t row = 0; row < 4; ++row) {
                const double fd = (zp[row] - zm[row]) / (2.0 * h);
                CHECK(std::abs(j(row, col) - fd) <= 1e-5);
            }
        }
    }
    CHECK(checked == 5);
}

TEST_CASE("loss terms: perfect reconstruction with zero jacobian and no labels is zero") {
    SSCaeModel m = make_model(2, {2}, {2}, Activation::linear, Activation::linear, 9);
    std::fill(m.encoder[0].W.data.begin(), m.encoder[0].W.data.end(), 0.0);
    std::fill(m.decoder[0].W.data.begin(), m.decoder[0].W.data.end(), 0.0);
    m.decoder[0].b = {0.4, 0.6};
    const MiniBatch b = single_row_batch({0.4, 0.6}, 0.0, 0.0);
    const LossTerms t = loss_terms(m, b, 1.0);
    CHECK(t.recon == 0.0);
    CHECK(t.contractive == 0.0);
    CHECK(t.supervised == 0.0);
    CHECK(t.total == 0.0);
}

TEST_CASE("loss terms: single unlabeled sample recon value") {
    SSCaeModel m = make_model(2, {2}, {2}, Activation::linear, Activation::linear, 10);
    std::fill(m.encoder[0].W.data.begin(), m.encoder[0].W.data.end(), 0.0);
    std::fill(m.decoder[0].W.data.begin(), m.decoder[0].W.data.end(), 0.0);
    const MiniBatch b = single_row_batch({1.0, 0.0}, 0.0, 0.0);
    const LossTerms t = loss_terms(m, b, 0.0);
    CHECK(t.recon == 1.0);
    CHECK(t.total == 1.0);
}

TEST_CASE("loss terms: lambda_c = 0 and lambda = 0 degenerate to the plain autoencoder") {
    const SSCaeModel m = make_model(5, {6, 3}, {6, 5}, Activation::relu, Activation::sigmoid, 11);
    SeededRng rng(12);
    MiniBatch b = random_batch(6, 5, 0.0, rng);
    const LossTerms t = loss_terms(m, b, 0.0);
    CHECK(t.contractive == 0.0);
    CHECK(t.supervised == 0.0);
    double mse = 0.0;
    for (std::size_t r = 0; r < b.X.rows; ++r) {
        Vector x(5);
        for (std::size_t j = 0; j < 5; ++j) x[j] = b.X(r, j);
        mse += squared_distance(x, forward(m, x).xhat());
    }
    mse /= static_cast<double>(b.X.rows);
    CHECK(t.total == doctest::Approx(mse).epsilon(1e-14));
}

TEST_CASE("analytic gradients match finite differences on sigmoid nets") {
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
        const SSCaeModel m = make_model(6, {8, 4, 2}, {4, 8, 6}, Activation::sigmoid,
                                        Activation::sigmoid, 100 + seed);
        SeededRng rng(200 + seed);
        const MiniBatch b = random_batch(4, 6, 1.0, rng);
        const double lambda_c = 0.1;

        Gradients g;
        backward(m, b, lambda_c, g);
        const std::vector<double> analytic = flatten_grads(m, g);
        const std::vector<double> numeric = fd_gradient(m, b, lambda_c, 1e-5);
        REQUIRE(analytic.size() == numeric.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double rel =
                std::abs(analytic[i] - numeric[i]) / std::max(1.0, std::abs(numeric[i]));
            worst = std::max(worst, rel);
        }
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("gradients with lambda_c=0, lambda=0 equal plain autoencoder gradients") {
    const SSCaeModel m =
        make_model(5, {6, 2}, {6, 5}, Activation::sigmoid, Activation::sigmoid, 31);
    SeededRng rng(32);
    const MiniBatch b = random_batch(3, 5, 0.0, rng);
    Gradients g;
    backward(m, b, 0.0, g);
    const std::vector<double> analytic = flatten_grads(m, g);
    const std::vector<double> numeric = fd_gradient(m, b, 0.0, 1e-5);
    for (std::size_t i = 0; i < analytic.size(); ++i)
        CHECK(std::abs(analytic[i] - numeric[i]) <= 1e-6 * std::max(1.0, std::abs(numeric[i])));
}

TEST_CASE("contractive gradient contribution switches off exactly at lambda_c = 0") {
    SSCaeModel m = make_model(4, {5, 2}, {5, 4}, Activation::relu, Activation::sigmoid, 33);
    for (auto& l : m.encoder) std::fill(l.b.begin(), l.b.end(), 0.5);  // keep units alive
    SeededRng rng(34);
    const MiniBatch b = random_batch(3, 4, 0.0, rng);
    Gradients g_zero, g_on;
    backward(m, b, 0.0, g_zero);
    const LossTerms t = loss_terms(m, b, 0.0);
    CHECK(t.contractive == 0.0);
    REQUIRE(loss_terms(m, b, 1.0).contractive > 0.0);
    backward(m, b, 1.0, g_on);
    bool changed = false;
    for (std::size_t l = 0; l < g_zero.enc_W.size(); ++l)
        for (std::size_t i = 0; i < g_zero.enc_W[l].data.size(); ++i)
            changed |= g_zero.enc_W[l].data[i] != g_on.enc_W[l].data[i];
    CHECK(changed);
}

TEST_CASE("duplicated sample gives the same mean gradient as the single sample") {
    const SSCaeModel m =
        make_model(4, {5, 2}, {5, 4}, Activation::sigmoid, Activation::sigmoid, 35);
    const Vector x = {0.2, 0.8, 0.5, 0.1};
    const MiniBatch one = single_row_batch(x, 1.0, 1.0);
    MiniBatch two;
    two.X = Matrix(2, 4);
    for (std::size_t j = 0; j < 4; ++j) {
        two.X(0, j) = x[j];
        two.X(1, j) = x[j];
    }
    two.y = {1.0, 1.0};
    two.alpha = {1.0, 1.0};
    Gradients g1, g2;
    backward(m, one, 0.3, g1);
    backward(m, two, 0.3, g2);
    const auto f1 = flatten_grads(m, g1);
    const auto f2 = flatten_grads(m, g2);
    for (std::size_t i = 0; i < f1.size(); ++i)
        CHECK(f1[i] == doctest::Approx(f2[i]).epsilon(1e-14));
}

TEST_CASE("train with zero steps returns the seeded initial model") {
    const Dataset ds = toy_dataset(32, 4, 77);
    TrainConfig cfg;
    cfg.steps = 0;
    cfg.seed = 5;
    cfg.encoder_widths = {5, 2};
    cfg.decoder_widths = {5};
    const TrainResult r = train(ds, cfg);
    const SSCaeModel fresh = make_model(4, {5, 2}, {5, 4}, cfg.hidden_act, cfg.output_act,
                                        derive_seed(5, "init"));
    CHECK(flatten_params(r.model) == flatten_params(fresh));
    CHECK(r.history.empty());
}

TEST_CASE("training reduces reconstruction loss on toy data") {
    const Dataset ds = toy_dataset(64, 4, 88);
    TrainConfig cfg;
    cfg.steps = 500;
    cfg.batch_size = 16;
    cfg.seed = 9;
    cfg.encoder_widths = {6, 2};
    cfg.decoder_widths = {6};
    cfg.lambda_c = 1e-4;
    const TrainResult r = train(ds, cfg);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        first += r.history[i].recon;
        last += r.history[r.history.size() - 1 - i].recon;
    }
    CHECK(last < first);
}

TEST_CASE("training is bitwise reproducible under a fixed seed") {
    const Dataset ds = toy_dataset(48, 4, 99);
    TrainConfig cfg;
    cfg.steps = 120;
    cfg.batch_size = 8;
    cfg.seed = 21;
    cfg.encoder_widths = {5, 2};
    cfg.decoder_widths = {5};
    const TrainResult a = train(ds, cfg);
    const TrainResult b = train(ds, cfg);
    CHECK(flatten_params(a.model) == flatten_params(b.model));
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i)
        CHECK(a.history[i].total == b.history[i].total);
}

TEST_CASE("raising lambda_c weakly shrinks the encoder jacobian on held-out points") {
    const Dataset ds = toy_dataset(96, 4, 111);
    TrainConfig weak, strong;
    weak.steps = strong.steps = 600;
    weak.batch_size = strong.batch_size = 16;
    weak.seed = strong.seed = 4;
    weak.encoder_widths = strong.encoder_widths = {6, 2};
    weak.decoder_widths = strong.decoder_widths = {6};
    weak.lambda_c = 0.0;
    strong.lambda_c = 1.0;
    const SSCaeModel m_weak = train(ds, weak).model;
    const SSCaeModel m_strong = train(ds, strong).model;
    SeededRng rng(5);
    double f_weak = 0.0, f_strong = 0.0;
    for (int t = 0; t < 50; ++t) {
        Vector x(4);
        for (double& v : x) v = rng.uniform01();
        const Matrix jw = encoder_jacobian(m_weak, x);
        const Matrix js = encoder_jacobian(m_strong, x);
        for (double v : jw.data) f_weak += v * v;
        for (double v : js.data) f_strong += v * v;
    }
    CHECK(f_strong <= f_weak);
}

TEST_CASE("training aborts with a numeric error when the loss diverges") {
    // Finite but enormous inputs overflow the squared reconstruction error.
    Dataset ds = toy_dataset(32, 4, 123);
    for (double& v : ds.X.data) v = (v + 0.5) * 1e160;
    TrainConfig cfg;
    cfg.steps = 10;
    cfg.batch_size = 8;
    cfg.seed = 3;
    cfg.encoder_widths = {6, 2};
    cfg.decoder_widths = {6};
    cfg.hidden_act = Activation::relu;
    cfg.output_act = Activation::linear;
    cfg.lambda_c = 0.0;
    CHECK_THROWS_AS(train(ds, cfg), NumericError);
}

TEST_CASE("model persistence round-trips losslessly") {
    const Dataset ds = toy_dataset(16, 4, 321);
    TrainConfig cfg;
    cfg.steps = 30;
    cfg.batch_size = 8;
    cfg.seed = 17;
    cfg.encoder_widths = {5, 2};
    cfg.decoder_widths = {5};
    const TrainResult r = train(ds, cfg);

    const std::string path = "test_model_roundtrip.json";
    save_model(path, r.model, ds.normalizer, cfg);
    Normalizer norm2;
    TrainConfig cfg2;
    const SSCaeModel loaded = load_model(path, &norm2, &cfg2);
    std::remove(path.c_str());

    CHECK(flatten_params(loaded) == flatten_params(r.model));
    CHECK(norm2.mins == ds.normalizer.mins);
    CHECK(norm2.maxs == ds.normalizer.maxs);
    CHECK(cfg2.lambda_c == cfg.lambda_c);
    CHECK(cfg2.steps == cfg.steps);
    SeededRng rng(18);
    Vector x(4);
    for (double& v : x) v = rng.uniform01();
    CHECK(forward(loaded, x).xhat() == forward(r.model, x).xhat());
}

}
