#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "xad/dataset.hpp"
#include "xad/numerics.hpp"

namespace xad {

enum class Activation { relu, sigmoid, linear };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct LayerParams {
    Matrix W;  // out x in
    Vector b;  // out
    Activation act = Activation::relu;

    std::size_t in_dim() const { return W.cols; }
    std::size_t out_dim() const { return W.rows; }
    std::size_t n_params() const { return W.data.size() + b.size(); }
};

// Contractive autoencoder with a one-logit prediction head on the bottleneck.
// The head is trained jointly but not counted as an encoder/decoder parameter.
struct SSCaeModel {
    std::vector<LayerParams> encoder;
    std::vector<LayerParams> decoder;
    LayerParams head;  // 1 x latent_dim affine, logistic applied on top
    std::size_t input_dim = 0;
    std::size_t latent_dim = 0;
};

// encoder_widths lists every encoder layer output (last entry = latent dim);
// decoder_widths lists every decoder layer output (last entry = input dim).
// Weights start uniform in +-sqrt(6/(fan_in+fan_out)), biases at zero.
SSCaeModel make_model(std::size_t input_dim, const std::vector<std::size_t>& encoder_widths,
                      const std::vector<std::size_t>& decoder_widths, Activation hidden_act,
                      Activation output_act, std::uint64_t seed);

// The reference architecture: 20 -> 64 -> 32 -> 16 encoder and
// 16 -> 16 -> 32 -> 64 -> 20 decoder, ReLU hidden, logistic output.
SSCaeModel make_reference_model(std::uint64_t seed);

// Encoder + decoder weight and bias count (head excluded).
std::size_t trainable_params(const SSCaeModel& model);

struct ForwardTrace {
    Vector x;
    std::vector<Vector> enc_pre;   // a per encoder layer
    std::vector<Vector> enc_act;   // h per encoder layer; back() == z
    std::vector<Vector> dec_pre;
    std::vector<Vector> dec_act;   // back() == xhat
    double head_logit = 0.0;
    double yhat = 0.5;

    const Vector& z() const { return enc_act.back(); }
    const Vector& xhat() const { return dec_act.back(); }
};

ForwardTrace forward(const SSCaeModel& model, const Vector& x);

// Exact Jacobian dz/dx of the deep encoder (chain product over all layers).
Matrix encoder_jacobian(const SSCaeModel& model, const Vector& x);

struct LossTerms {
    double recon = 0.0;
    double contractive = 0.0;
    double supervised = 0.0;
    double total = 0.0;
};

struct Gradients {
    std::vector<Matrix> enc_W;
    std::vector<Vector> enc_b;
    std::vector<Matrix> dec_W;
    std::vector<Vector> dec_b;
    Vector head_w;
    double head_b = 0.0;
};

// Batch-mean losses: recon is the squared reconstruction distance per sample,
// contractive is lambda_c times the squared Frobenius norm of the encoder
// Jacobian, supervised is the alpha-weighted binary cross entropy.
LossTerms loss_terms(const SSCaeModel& model, const MiniBatch& batch, double lambda_c);

// Exact analytic gradients of the total loss, including the second-order
// contribution of the contractive term through the activation derivatives.
LossTerms backward(const SSCaeModel& model, const MiniBatch& batch, double lambda_c,
                   Gradients& grads);

std::vector<double> flatten_params(const SSCaeModel& model);
void unflatten_params(SSCaeModel& model, const std::vector<double>& flat);
std::vector<double> flatten_grads(const SSCaeModel& model, const Gradients& grads);

struct TrainConfig {
    double lambda_c = 1e-4;   // contractive weight
    double lambda = 1.0;      // supervised weight
    double lr = 0.001;
    std::size_t batch_size = 64;
    std::size_t steps = 10000;
    std::uint64_t seed = 0;
    std::size_t log_interval = 100;
    std::size_t latent_dim = 16;
    std::vector<std::size_t> encoder_widths = {64, 32, 16};
    std::vector<std::size_t> decoder_widths = {16, 32, 64};  // output layer appended
    Activation hidden_act = Activation::relu;
    Activation output_act = Activation::sigmoid;
};

struct TrainResult {
    SSCaeModel model;
    std::vector<LossTerms> history;  // one entry per step
};

// Invoked every log_interval steps (and on the final step).
using TrainObserver = std::function<void(std::size_t step, const SSCaeModel&, const LossTerms&)>;

// Runs Adam over mixed labeled/unlabeled mini-batches drawn from `train`.
// Aborts with NumericError if the total loss stops being finite.
TrainResult train(const Dataset& train, const TrainConfig& cfg,
                  const TrainObserver& observer = nullptr);

// Versioned JSON persistence; numeric payloads round-trip at full precision.
std::string model_to_json(const SSCaeModel& model, const Normalizer& normalizer,
                          const TrainConfig& cfg);
SSCaeModel model_from_json(const std::string& text, Normalizer* normalizer_out = nullptr,
                           TrainConfig* cfg_out = nullptr);
void save_model(const std::string& path, const SSCaeModel& model, const Normalizer& normalizer,
                const TrainConfig& cfg);
SSCaeModel load_model(const std::string& path, Normalizer* normalizer_out = nullptr,
                      TrainConfig* cfg_out = nullptr);

}  // namespace xad
