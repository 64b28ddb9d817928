#pragma once

// Variational autoencoder with an SO(2) latent pose.
//
// encoder   image (W) -> MLP -> (u1, u2, raw log-variance)
//           mu = atan2(u2, u1), log_var = clamp(raw, -9, 2)
// sample    theta = mu + exp(log_var / 2) * eps,  eps ~ N(0, 1)
// decoder   z = T(theta) c, with T the block-diagonal sum of the rotation
//           representations at frequencies 1..K and c a learned 2K vector;
//           image = sigmoid(MLP(z))
// loss      BCE summed over pixels + beta * max(0, log 2pi - 1/2 log(2 pi e sigma^2))

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "orbitpose/autodiff.hpp"
#include "orbitpose/dataset.hpp"
#include "orbitpose/geometry.hpp"
#include "orbitpose/mlp.hpp"

namespace orbitpose {

inline constexpr double kMinLogVar = -9.0;
inline constexpr double kMaxLogVar = 2.0;

struct VaeHyperparams {
  int k = 4;
  std::vector<int> encoder_hidden{128, 128};
  std::vector<int> decoder_hidden{128, 128};
  double lr = 1e-3;
  int batch_size = 64;
  int epochs = 200;
  int restarts = 3;
  double beta = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const VaeHyperparams&, const VaeHyperparams&) = default;
};

struct EncoderOutput {
  double u1 = 1.0;
  double u2 = 0.0;
  double mu = 0.0;
  double log_var = 0.0;
};

struct IrrepEmbedding {
  int k = 1;
  double theta = 0.0;
  Eigen::MatrixXd matrix;
};

struct VaeModel {
  int width = 0;
  VaeHyperparams hyper;
  /// Seed that initialized this particular model (the restart seed).
  std::uint64_t seed = 0;
  Mlp encoder;
  Mlp decoder;
  ad::Var content;

  int k() const { return hyper.k; }
  std::vector<ad::Var> parameters() const;
  std::size_t parameter_count() const;
  VaeModel clone() const;
};

/// Fresh model for images of `width` pixels, initialized from `seed`.
VaeModel make_model(int width, const VaeHyperparams& hyper, std::uint64_t seed);

EncoderOutput encode(const VaeModel& model, const Image1D& image);
std::vector<EncoderOutput> encode_batch(const VaeModel& model, const std::vector<const Image1D*>& images);

Rotation reparametrize(double mu, double log_var, double epsilon);

IrrepEmbedding irrep_matrix(double theta, int k);

Image1D decode(const VaeModel& model, const IrrepEmbedding& embedding);

struct LossTerms {
  double total = 0.0;
  double bce = 0.0;
  double kl = 0.0;
};

double kl_term(double log_var);

LossTerms loss_terms(const VaeModel& model, const Image1D& image, double theta_sample, double mu, double log_var);
double loss(const VaeModel& model, const Image1D& image, double theta_sample, double mu, double log_var);

/// Gradient of the single-image loss with respect to (mu, log_var), with
/// theta_sample = mu + exp(log_var / 2) * epsilon built inside the graph.
struct PosteriorGradient {
  double loss = 0.0;
  double d_mu = 0.0;
  double d_log_var = 0.0;
};
PosteriorGradient posterior_gradient(const VaeModel& model, const Image1D& image, double mu, double log_var,
                                     double epsilon);

// Graph-level pieces shared by training and the value-level functions above.
namespace graph {

struct Encoded {
  ad::Var u;        // B x 2
  ad::Var mu;       // B x 1
  ad::Var log_var;  // B x 1
};

Encoded encode(const VaeModel& model, const ad::Var& images);
ad::Var reparametrize(const ad::Var& mu, const ad::Var& log_var, const ad::Tensor& epsilon);
/// Rows of T(theta_b) c for each batch row b: (B x 1) -> (B x 2K).
ad::Var embed(const ad::Var& theta, const ad::Var& content, int k);
ad::Var decode_logits(const VaeModel& model, const ad::Var& z);

struct Loss {
  ad::Var total;  // mean over the batch of bce + beta * kl
  double bce = 0.0;  // mean per-image BCE
  double kl = 0.0;   // mean per-image KL
};
Loss batch_loss(const VaeModel& model, const ad::Tensor& images, const ad::Tensor& epsilon);

}  // namespace graph

struct EpochRecord {
  int restart = 0;
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_bce = 0.0;
  double val_kl = 0.0;
};

struct RestartRecord {
  int restart = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string failure;
  /// Validation metrics of the freshly initialized model.
  EpochRecord initial;
  std::vector<EpochRecord> epochs;
  double final_val_loss = 0.0;
};

struct TrainResult {
  VaeModel model;
  int selected_restart = 0;
  std::vector<RestartRecord> restarts;

  /// Every epoch record of every restart, restart-major.
  std::vector<EpochRecord> history() const;
};

/// Seed of restart r, derived from the base seed through std::seed_seq.
std::uint64_t restart_seed(std::uint64_t seed, int restart);

/// Validation metrics with epsilon = 0 over the given samples.
EpochRecord evaluate_split(const VaeModel& model, const Dataset& dataset, Split split);

TrainResult train(const Dataset& dataset, const VaeHyperparams& hyper);

struct SearchEntry {
  VaeHyperparams hyper;
  double best_val_loss = 0.0;
  bool failed = false;
};

struct SearchResult {
  TrainResult best;
  VaeHyperparams best_hyper;
  std::vector<SearchEntry> entries;
};

/// Trains every combination of encoder depth, decoder depth and hidden width
/// from the given sets and keeps the one with the lowest final validation loss.
SearchResult search_architectures(const Dataset& dataset, const VaeHyperparams& base,
                                  const std::vector<int>& depths = {2, 3},
                                  const std::vector<int>& widths = {64, 128});

}  // namespace orbitpose
