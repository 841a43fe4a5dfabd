#include "xad/sscae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xad/errors.hpp"

namespace xad {

namespace {

inline double logistic_raw(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double act_apply(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::sigmoid: return logistic_raw(x);
        default: return x;
    }
}

inline double act_prime(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid: {
            const double s = logistic_raw(x);
            return s * (1.0 - s);
        }
        default: return 1.0;
    }
}

inline double act_second(Activation a, double x) {
    if (a != Activation::sigmoid) return 0.0;
    const double s = logistic_raw(x);
    return s * (1.0 - s) * (1.0 - 2.0 * s);
}

Vector layer_affine(const LayerParams& layer, const Vector& h_prev) {
    Vector a(layer.out_dim());
    const std::size_t in = layer.in_dim();
    for (std::size_t i = 0; i < layer.out_dim(); ++i) {
        const double* row = &layer.W.data[i * in];
        double acc = layer.b[i];
        for (std::size_t j = 0; j < in; ++j) acc += row[j] * h_prev[j];
        a[i] = acc;
    }
    return a;
}

Vector apply_activation(Activation act, const Vector& a) {
    Vector h(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) h[i] = act_apply(act, a[i]);
    return h;
}

double bce(double y, double yhat) {
    return -(y * std::log(yhat) + (1.0 - y) * std::log(1.0 - yhat));
}

// Forward Jacobian sweep over the encoder: Q[l] = W[l] P[l-1] is the
// pre-activation Jacobian, P[l] = diag(f'(a[l])) Q[l] the post-activation one
// (P[-1] is the identity and never materialized).
void jacobian_sweep(const SSCaeModel& model, const ForwardTrace& trace, std::vector<Matrix>& Q,
                    std::vector<Matrix>& P) {
    const std::size_t n = model.input_dim;
    const std::size_t L = model.encoder.size();
    Q.resize(L);
    P.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        const LayerParams& layer = model.encoder[l];
        const std::size_t out = layer.out_dim();
        Q[l] = Matrix(out, n);
        if (l == 0) {
            Q[0].data = layer.W.data;
        } else {
            const Matrix& prev = P[l - 1];
            for (std::size_t i = 0; i < out; ++i) {
                const double* wrow = &layer.W.data[i * layer.in_dim()];
                double* qrow = &Q[l].data[i * n];
                for (std::size_t k = 0; k < layer.in_dim(); ++k) {
                    const double w = wrow[k];
                    if (w == 0.0) continue;
                    const double* prow = &prev.data[k * n];
                    for (std::size_t j = 0; j < n; ++j) qrow[j] += w * prow[j];
                }
            }
        }
        P[l] = Matrix(out, n);
        for (std::size_t i = 0; i < out; ++i) {
            const double fp = act_prime(layer.act, trace.enc_pre[l][i]);
            const double* qrow = &Q[l].data[i * n];
            double* prow = &P[l].data[i * n];
            for (std::size_t j = 0; j < n; ++j) prow[j] = fp * qrow[j];
        }
    }
}

double frob2(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.data) acc += v * v;
    return acc;
}

void zero_like(const SSCaeModel& model, Gradients& g) {
    g.enc_W.clear();
    g.enc_b.clear();
    g.dec_W.clear();
    g.dec_b.clear();
    for (const auto& l : model.encoder) {
        g.enc_W.emplace_back(l.out_dim(), l.in_dim());
        g.enc_b.emplace_back(l.out_dim(), 0.0);
    }
    for (const auto& l : model.decoder) {
        g.dec_W.emplace_back(l.out_dim(), l.in_dim());
        g.dec_b.emplace_back(l.out_dim(), 0.0);
    }
    g.head_w.assign(model.latent_dim, 0.0);
    g.head_b = 0.0;
}

inline void add_outer(Matrix& gW, const Vector& delta, const Vector& h) {
    const std::size_t in = gW.cols;
    for (std::size_t i = 0; i < gW.rows; ++i) {
        const double d = delta[i];
        if (d == 0.0) continue;
        double* row = &gW.data[i * in];
        for (std::size_t j = 0; j < in; ++j) row[j] += d * h[j];
    }
}

inline Vector transposed_matvec(const Matrix& W, const Vector& v) {
    Vector out(W.cols, 0.0);
    for (std::size_t i = 0; i < W.rows; ++i) {
        const double d = v[i];
        if (d == 0.0) continue;
        const double* row = &W.data[i * W.cols];
        for (std::size_t j = 0; j < W.cols; ++j) out[j] += d * row[j];
    }
    return out;
}

// Accumulates per-sample loss and (unscaled) gradients; caller divides by the
// batch size afterwards.
void accumulate_sample(const SSCaeModel& model, const Vector& x, double y, double alpha,
                       double lambda_c, Gradients& g, LossTerms& sums) {
    const ForwardTrace trace = forward(model, x);
    const std::size_t Le = model.encoder.size();
    const std::size_t Ld = model.decoder.size();

    const double recon = squared_distance(x, trace.xhat());
    sums.recon += recon;

    double sup = 0.0;
    if (alpha != 0.0) sup = alpha * bce(y, trace.yhat);
    sums.supervised += sup;

    // Reconstruction path through the decoder.
    Vector delta(model.input_dim);
    {
        const Vector& xhat = trace.xhat();
        const LayerParams& out_layer = model.decoder[Ld - 1];
        for (std::size_t j = 0; j < model.input_dim; ++j) {
            delta[j] = 2.0 * (xhat[j] - x[j]) * act_prime(out_layer.act, trace.dec_pre[Ld - 1][j]);
        }
    }
    Vector gz;
    for (std::size_t l = Ld; l-- > 0;) {
        const Vector& h_prev = (l == 0) ? trace.z() : trace.dec_act[l - 1];
        add_outer(g.dec_W[l], delta, h_prev);
        for (std::size_t i = 0; i < delta.size(); ++i) g.dec_b[l][i] += delta[i];
        Vector back = transposed_matvec(model.decoder[l].W, delta);
        if (l == 0) {
            gz = std::move(back);
        } else {
            for (std::size_t i = 0; i < back.size(); ++i)
                back[i] *= act_prime(model.decoder[l - 1].act, trace.dec_pre[l - 1][i]);
            delta = std::move(back);
        }
    }

    // Supervised path through the head.
    if (alpha != 0.0) {
        const double dt = alpha * (trace.yhat - y);
        for (std::size_t j = 0; j < model.latent_dim; ++j) {
            g.head_w[j] += dt * trace.z()[j];
            gz[j] += dt * model.head.W(0, j);
        }
        g.head_b += dt;
    }

    // Shared encoder backprop for the reconstruction + supervised signal.
    Vector delta_e(model.latent_dim);
    for (std::size_t i = 0; i < model.latent_dim; ++i)
        delta_e[i] = gz[i] * act_prime(model.encoder[Le - 1].act, trace.enc_pre[Le - 1][i]);
    for (std::size_t l = Le; l-- > 0;) {
        const Vector& h_prev = (l == 0) ? trace.x : trace.enc_act[l - 1];
        add_outer(g.enc_W[l], delta_e, h_prev);
        for (std::size_t i = 0; i < delta_e.size(); ++i) g.enc_b[l][i] += delta_e[i];
        if (l > 0) {
            Vector back = transposed_matvec(model.encoder[l].W, delta_e);
            for (std::size_t i = 0; i < back.size(); ++i)
                back[i] *= act_prime(model.encoder[l - 1].act, trace.enc_pre[l - 1][i]);
            delta_e = std::move(back);
        }
    }

    if (lambda_c == 0.0) return;

    // Contractive term: value plus exact gradient through both the Jacobian
    // chain and the activation-derivative (second order) route.
    std::vector<Matrix> Q, P;
    jacobian_sweep(model, trace, Q, P);
    const std::size_t n = model.input_dim;
    sums.contractive += lambda_c * frob2(P[Le - 1]);

    Matrix GP = P[Le - 1];
    for (double& v : GP.data) v *= 2.0 * lambda_c;
    Vector gh;  // d(term)/dh at the current layer's output, empty means zero

    for (std::size_t l = Le; l-- > 0;) {
        const LayerParams& layer = model.encoder[l];
        const std::size_t out = layer.out_dim();
        const Vector& a = trace.enc_pre[l];
        const Vector& h_prev = (l == 0) ? trace.x : trace.enc_act[l - 1];

        Matrix GQ(out, n);
        for (std::size_t i = 0; i < out; ++i) {
            const double fp = act_prime(layer.act, a[i]);
            const double* gprow = &GP.data[i * n];
            double* gqrow = &GQ.data[i * n];
            for (std::size_t j = 0; j < n; ++j) gqrow[j] = fp * gprow[j];
        }

        Vector ga(out, 0.0);
        if (layer.act == Activation::sigmoid) {
            for (std::size_t i = 0; i < out; ++i) {
                const double fpp = act_second(layer.act, a[i]);
                if (fpp == 0.0) continue;
                const double* gprow = &GP.data[i * n];
                const double* qrow = &Q[l].data[i * n];
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += gprow[j] * qrow[j];
                ga[i] = fpp * acc;
            }
        }
        if (!gh.empty()) {
            for (std::size_t i = 0; i < out; ++i) ga[i] += act_prime(layer.act, a[i]) * gh[i];
        }

        // dC/dW has two routes: the explicit W in Q = W P_prev, and the
        // pre-activation route a = W h_prev + b.
        if (l == 0) {
            for (std::size_t i = 0; i < out; ++i) {
                const double* gqrow = &GQ.data[i * n];
                double* grow = &g.enc_W[0].data[i * n];
                for (std::size_t j = 0; j < n; ++j) grow[j] += gqrow[j];
            }
        } else {
            const Matrix& Pprev = P[l - 1];
            const std::size_t in = layer.in_dim();
            for (std::size_t i = 0; i < out; ++i) {
                const double* gqrow = &GQ.data[i * n];
                double* grow = &g.enc_W[l].data[i * in];
                for (std::size_t k = 0; k < in; ++k) {
                    const double* prow = &Pprev.data[k * n];
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += gqrow[j] * prow[j];
                    grow[k] += acc;
                }
            }
        }
        add_outer(g.enc_W[l], ga, h_prev);
        for (std::size_t i = 0; i < out; ++i) g.enc_b[l][i] += ga[i];

        if (l > 0) {
            const std::size_t in = layer.in_dim();
            Matrix GPprev(in, n);
            for (std::size_t i = 0; i < out; ++i) {
                const double* wrow = &layer.W.data[i * in];
                const double* gqrow = &GQ.data[i * n];
                for (std::size_t k = 0; k < in; ++k) {
                    const double w = wrow[k];
                    if (w == 0.0) continue;
                    double* grow = &GPprev.data[k * n];
                    for (std::size_t j = 0; j < n; ++j) grow[j] += w * gqrow[j];
                }
            }
            GP = std::move(GPprev);
            gh = transposed_matvec(layer.W, ga);
        }
    }
}

}  // namespace

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        default: return "linear";
    }
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "linear") return Activation::linear;
    throw ConfigError("unknown activation: " + name);
}

SSCaeModel make_model(std::size_t input_dim, const std::vector<std::size_t>& encoder_widths,
                      const std::vector<std::size_t>& decoder_widths, Activation hidden_act,
                      Activation output_act, std::uint64_t seed) {
    if (encoder_widths.empty() || decoder_widths.empty())
        throw ConfigError("model needs at least one encoder and one decoder layer");
    SeededRng rng(seed);
    auto init_layer = [&](std::size_t in, std::size_t out, Activation act) {
        LayerParams layer;
        layer.W = Matrix(out, in);
        layer.b.assign(out, 0.0);
        layer.act = act;
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& w : layer.W.data) w = rng.uniform(-bound, bound);
        return layer;
    };

    SSCaeModel model;
    model.input_dim = input_dim;
    model.latent_dim = encoder_widths.back();
    std::size_t in = input_dim;
    for (const std::size_t out : encoder_widths) {
        model.encoder.push_back(init_layer(in, out, hidden_act));
        in = out;
    }
    for (std::size_t i = 0; i < decoder_widths.size(); ++i) {
        const bool last = (i + 1 == decoder_widths.size());
        model.decoder.push_back(init_layer(in, decoder_widths[i], last ? output_act : hidden_act));
        in = decoder_widths[i];
    }
    if (model.decoder.back().out_dim() != input_dim)
        throw ConfigError("decoder output width must equal the input dimension");
    model.head = init_layer(model.latent_dim, 1, Activation::linear);
    return model;
}

SSCaeModel make_reference_model(std::uint64_t seed) {
    return make_model(20, {64, 32, 16}, {16, 32, 64, 20}, Activation::relu, Activation::sigmoid,
                      seed);
}

std::size_t trainable_params(const SSCaeModel& model) {
    std::size_t n = 0;
    for (const auto& l : model.encoder) n += l.n_params();
    for (const auto& l : model.decoder) n += l.n_params();
    return n;
}

ForwardTrace forward(const SSCaeModel& model, const Vector& x) {
    if (x.size() != model.input_dim) {
        throw DimensionError("forward: input has " + std::to_string(x.size()) +
                             " features, model expects " + std::to_string(model.input_dim));
    }
    ForwardTrace trace;
    trace.x = x;
    const Vector* h = &trace.x;
    for (const auto& layer : model.encoder) {
        trace.enc_pre.push_back(layer_affine(layer, *h));
        trace.enc_act.push_back(apply_activation(layer.act, trace.enc_pre.back()));
        h = &trace.enc_act.back();
    }
    for (const auto& layer : model.decoder) {
        trace.dec_pre.push_back(layer_affine(layer, *h));
        trace.dec_act.push_back(apply_activation(layer.act, trace.dec_pre.back()));
        h = &trace.dec_act.back();
    }
    trace.head_logit = dot(model.head.W.data, trace.z()) + model.head.b[0];
    trace.yhat = sigmoid(trace.head_logit);
    return trace;
}

Matrix encoder_jacobian(const SSCaeModel& model, const Vector& x) {
    const ForwardTrace trace = forward(model, x);
    std::vector<Matrix> Q, P;
    jacobian_sweep(model, trace, Q, P);
    return P.back();
}

LossTerms loss_terms(const SSCaeModel& model, const MiniBatch& batch, double lambda_c) {
    if (batch.X.rows == 0) throw DataError("loss_terms: empty batch");
    LossTerms sums;
    for (std::size_t r = 0; r < batch.X.rows; ++r) {
        Vector x(batch.X.cols);
        for (std::size_t j = 0; j < batch.X.cols; ++j) x[j] = batch.X(r, j);
        const ForwardTrace trace = forward(model, x);
        sums.recon += squared_distance(x, trace.xhat());
        if (batch.alpha[r] != 0.0) sums.supervised += batch.alpha[r] * bce(batch.y[r], trace.yhat);
        if (lambda_c != 0.0) sums.contractive += lambda_c * frob2(encoder_jacobian(model, x));
    }
    const double inv = 1.0 / static_cast<double>(batch.X.rows);
    sums.recon *= inv;
    sums.contractive *= inv;
    sums.supervised *= inv;
    sums.total = sums.recon + sums.contractive + sums.supervised;
    return sums;
}

LossTerms backward(const SSCaeModel& model, const MiniBatch& batch, double lambda_c,
                   Gradients& grads) {
    if (batch.X.rows == 0) throw DataError("backward: empty batch");
    zero_like(model, grads);
    LossTerms sums;
    for (std::size_t r = 0; r < batch.X.rows; ++r) {
        Vector x(batch.X.cols);
        for (std::size_t j = 0; j < batch.X.cols; ++j) x[j] = batch.X(r, j);
        accumulate_sample(model, x, batch.y[r], batch.alpha[r], lambda_c, grads, sums);
    }
    const double inv = 1.0 / static_cast<double>(batch.X.rows);
    for (auto& m : grads.enc_W)
        for (double& v : m.data) v *= inv;
    for (auto& b : grads.enc_b)
        for (double& v : b) v *= inv;
    for (auto& m : grads.dec_W)
        for (double& v : m.data) v *= inv;
    for (auto& b : grads.dec_b)
        for (double& v : b) v *= inv;
    for (double& v : grads.head_w) v *= inv;
    grads.head_b *= inv;
    sums.recon *= inv;
    sums.contractive *= inv;
    sums.supervised *= inv;
    sums.total = sums.recon + sums.contractive + sums.supervised;
    return sums;
}

std::vector<double> flatten_params(const SSCaeModel& model) {
    std::vector<double> flat;
    auto push_layer = [&](const LayerParams& l) {
        flat.insert(flat.end(), l.W.data.begin(), l.W.data.end());
        flat.insert(flat.end(), l.b.begin(), l.b.end());
    };
    for (const auto& l : model.encoder) push_layer(l);
    for (const auto& l : model.decoder) push_layer(l);
    push_layer(model.head);
    return flat;
}

void unflatten_params(SSCaeModel& model, const std::vector<double>& flat) {
    std::size_t off = 0;
    auto pull_layer = [&](LayerParams& l) {
        std::copy(flat.begin() + off, flat.begin() + off + l.W.data.size(), l.W.data.begin());
        off += l.W.data.size();
        std::copy(flat.begin() + off, flat.begin() + off + l.b.size(), l.b.begin());
        off += l.b.size();
    };
    for (auto& l : model.encoder) pull_layer(l);
    for (auto& l : model.decoder) pull_layer(l);
    pull_layer(model.head);
    if (off != flat.size())
        throw DimensionError("unflatten_params: expected " + std::to_string(off) +
                             " values, got " + std::to_string(flat.size()));
}

std::vector<double> flatten_grads(const SSCaeModel& model, const Gradients& grads) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < model.encoder.size(); ++l) {
        flat.insert(flat.end(), grads.enc_W[l].data.begin(), grads.enc_W[l].data.end());
        flat.insert(flat.end(), grads.enc_b[l].begin(), grads.enc_b[l].end());
    }
    for (std::size_t l = 0; l < model.decoder.size(); ++l) {
        flat.insert(flat.end(), grads.dec_W[l].data.begin(), grads.dec_W[l].data.end());
        flat.insert(flat.end(), grads.dec_b[l].begin(), grads.dec_b[l].end());
    }
    flat.insert(flat.end(), grads.head_w.begin(), grads.head_w.end());
    flat.push_back(grads.head_b);
    return flat;
}

TrainResult train(const Dataset& train_ds, const TrainConfig& cfg, const TrainObserver& observer) {
    if (train_ds.size() == 0) throw DataError("train: empty dataset");
    if (cfg.lr <= 0.0) throw ConfigError("train: learning rate must be positive");
    if (cfg.lambda_c < 0.0 || cfg.lambda < 0.0)
        throw ConfigError("train: lambda_c and lambda must be nonnegative");

    std::vector<std::size_t> dec_widths = cfg.decoder_widths;
    dec_widths.push_back(train_ds.n_features());
    TrainResult result;
    result.model = make_model(train_ds.n_features(), cfg.encoder_widths, dec_widths,
                              cfg.hidden_act, cfg.output_act, derive_seed(cfg.seed, "init"));

    std::vector<double> params = flatten_params(result.model);
    AdamState adam(params.size());
    SeededRng batch_rng(derive_seed(cfg.seed, "batch"));
    Gradients grads;

    const std::size_t B_l =
        labeled_quota(cfg.batch_size, train_ds.labeled_idx.size(), train_ds.size());
    const std::size_t B_u = cfg.batch_size - B_l;

    result.history.reserve(cfg.steps);
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        const MiniBatch batch = sample_batch(train_ds, B_l, B_u, cfg.lambda, batch_rng);
        const LossTerms terms = backward(result.model, batch, cfg.lambda_c, grads);
        if (!std::isfinite(terms.total)) {
            throw NumericError("training diverged at step " + std::to_string(step) +
                               " (non-finite loss)");
        }
        const std::vector<double> gflat = flatten_grads(result.model, grads);
        adam_step(params, gflat, adam, cfg.lr);
        unflatten_params(result.model, params);
        result.history.push_back(terms);
        if (observer && (step % cfg.log_interval == 0 || step == cfg.steps)) {
            observer(step, result.model, terms);
        }
    }
    return result;
}

std::string model_to_json(const SSCaeModel& model, const Normalizer& normalizer,
                          const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["kind"] = "sscae";
    j["input_dim"] = model.input_dim;
    j["latent_dim"] = model.latent_dim;
    auto layer_json = [](const LayerParams& l, const char* role) {
        nlohmann::ordered_json lj;
        lj["role"] = role;
        lj["in"] = l.in_dim();
        lj["out"] = l.out_dim();
        lj["activation"] = activation_name(l.act);
        lj["W"] = l.W.data;
        lj["b"] = l.b;
        return lj;
    };
    j["layers"] = nlohmann::ordered_json::array();
    for (const auto& l : model.encoder) j["layers"].push_back(layer_json(l, "encoder"));
    for (const auto& l : model.decoder) j["layers"].push_back(layer_json(l, "decoder"));
    j["layers"].push_back(layer_json(model.head, "head"));
    j["normalizer"] = {{"features", normalizer.feature_names},
                       {"min", normalizer.mins},
                       {"max", normalizer.maxs}};
    j["train_config"] = {{"lambda_c", cfg.lambda_c},
                         {"lambda", cfg.lambda},
                         {"lr", cfg.lr},
                         {"batch_size", cfg.batch_size},
                         {"steps", cfg.steps},
                         {"seed", cfg.seed},
                         {"log_interval", cfg.log_interval},
                         {"encoder_widths", cfg.encoder_widths},
                         {"decoder_widths", cfg.decoder_widths},
                         {"hidden_act", activation_name(cfg.hidden_act)},
                         {"output_act", activation_name(cfg.output_act)}};
    return j.dump(2);
}

SSCaeModel model_from_json(const std::string& text, Normalizer* normalizer_out,
                           TrainConfig* cfg_out) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ArtifactError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (j.value("kind", "") != "sscae") throw ArtifactError("model file kind is not 'sscae'");
    if (j.value("format_version", 0) != 1)
        throw ArtifactError("unsupported model format_version");

    SSCaeModel model;
    model.input_dim = j.at("input_dim").get<std::size_t>();
    model.latent_dim = j.at("latent_dim").get<std::size_t>();
    for (const auto& lj : j.at("layers")) {
        LayerParams l;
        const auto out = lj.at("out").get<std::size_t>();
        const auto in = lj.at("in").get<std::size_t>();
        l.W = Matrix(out, in);
        l.W.data = lj.at("W").get<std::vector<double>>();
        l.b = lj.at("b").get<std::vector<double>>();
        l.act = activation_from_name(lj.at("activation").get<std::string>());
        if (l.W.data.size() != out * in || l.b.size() != out)
            throw ArtifactError("model layer payload has inconsistent shape");
        const std::string role = lj.at("role").get<std::string>();
        if (role == "encoder")
            model.encoder.push_back(std::move(l));
        else if (role == "decoder")
            model.decoder.push_back(std::move(l));
        else
            model.head = std::move(l);
    }
    if (normalizer_out) {
        normalizer_out->feature_names =
            j.at("normalizer").at("features").get<std::vector<std::string>>();
        normalizer_out->mins = j.at("normalizer").at("min").get<std::vector<double>>();
        normalizer_out->maxs = j.at("normalizer").at("max").get<std::vector<double>>();
    }
    if (cfg_out) {
        const auto& tc = j.at("train_config");
        cfg_out->lambda_c = tc.at("lambda_c").get<double>();
        cfg_out->lambda = tc.at("lambda").get<double>();
        cfg_out->lr = tc.at("lr").get<double>();
        cfg_out->batch_size = tc.at("batch_size").get<std::size_t>();
        cfg_out->steps = tc.at("steps").get<std::size_t>();
        cfg_out->seed = tc.at("seed").get<std::uint64_t>();
        cfg_out->log_interval = tc.at("log_interval").get<std::size_t>();
        cfg_out->encoder_widths = tc.at("encoder_widths").get<std::vector<std::size_t>>();
        cfg_out->decoder_widths = tc.at("decoder_widths").get<std::vector<std::size_t>>();
        cfg_out->hidden_act = activation_from_name(tc.at("hidden_act").get<std::string>());
        cfg_out->output_act = activation_from_name(tc.at("output_act").get<std::string>());
    }
    return model;
}

void save_model(const std::string& path, const SSCaeModel& model, const Normalizer& normalizer,
                const TrainConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot write model file: " + path);
    out << model_to_json(model, normalizer, cfg) << '\n';
}

SSCaeModel load_model(const std::string& path, Normalizer* normalizer_out,
                      TrainConfig* cfg_out) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str(), normalizer_out, cfg_out);
}

}  // namespace xad
