#include "orbitpose/vae.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "orbitpose/errors.hpp"
#include "orbitpose/optim.hpp"

namespace orbitpose {

namespace {

// 1/2 log(2 pi) - 1/2: KL is positive exactly when log_var < log(2 pi) - 1.
const double kKlOffset = 0.5 * std::log(kTwoPi) - 0.5;
constexpr double kOutputFloor = 1e-15;

void check_finite(const ad::Tensor& t, const char* what) {
  for (int i = 0; i < t.rows(); ++i) {
    for (int j = 0; j < t.cols(); ++j) {
      if (!std::isfinite(t(i, j))) {
        throw NumericError(std::string(what) + ": non-finite activation at batch index " + std::to_string(i));
      }
    }
  }
}

ad::Tensor stack_images(const std::vector<const Image1D*>& images, int width) {
  ad::Tensor t(static_cast<int>(images.size()), width);
  for (std::size_t b = 0; b < images.size(); ++b) {
    const auto& px = images[b]->pixels();
    if (static_cast<int>(px.size()) != width) {
      throw InvalidArgument("image width " + std::to_string(px.size()) + " does not match model width " +
                            std::to_string(width));
    }
    std::copy(px.begin(), px.end(), t.data().begin() + static_cast<long>(b) * width);
  }
  return t;
}

}  // namespace

void VaeHyperparams::validate() const {
  if (k < 1) throw InvalidArgument("K must be at least 1");
  for (int w : encoder_hidden)
    if (w < 1) throw InvalidArgument("encoder hidden widths must be positive");
  for (int w : decoder_hidden)
    if (w < 1) throw InvalidArgument("decoder hidden widths must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw InvalidArgument("learning rate must be positive");
  if (batch_size < 1) throw InvalidArgument("batch size must be positive");
  if (epochs < 0) throw InvalidArgument("epochs must be nonnegative");
  if (restarts < 1) throw InvalidArgument("restarts must be at least 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be nonnegative");
}

std::vector<ad::Var> VaeModel::parameters() const {
  auto out = encoder.parameters();
  const auto dec = decoder.parameters();
  out.insert(out.end(), dec.begin(), dec.end());
  out.push_back(content);
  return out;
}

std::size_t VaeModel::parameter_count() const {
  return encoder.parameter_count() + decoder.parameter_count() + content->value.size();
}

VaeModel VaeModel::clone() const {
  VaeModel m;
  m.width = width;
  m.hyper = hyper;
  m.seed = seed;
  m.encoder = encoder.clone();
  m.decoder = decoder.clone();
  m.content = ad::parameter(content->value);
  return m;
}

VaeModel make_model(int width, const VaeHyperparams& hyper, std::uint64_t seed) {
  hyper.validate();
  if (width < 2) throw InvalidArgument("image width must be at least 2");
  std::mt19937_64 rng(seed);
  VaeModel m;
  m.width = width;
  m.hyper = hyper;
  m.seed = seed;

  std::vector<int> enc{width};
  enc.insert(enc.end(), hyper.encoder_hidden.begin(), hyper.encoder_hidden.end());
  enc.push_back(3);
  m.encoder = Mlp(enc, Activation::relu, Activation::identity, rng);

  std::vector<int> dec{2 * hyper.k};
  dec.insert(dec.end(), hyper.decoder_hidden.begin(), hyper.decoder_hidden.end());
  dec.push_back(width);
  // Logits; the sigmoid is fused into the loss during training.
  m.decoder = Mlp(dec, Activation::relu, Activation::identity, rng);

  std::normal_distribution<double> normal(0.0, 1.0);
  ad::Tensor c(1, 2 * hyper.k);
  for (double& x : c.data()) x = normal(rng);
  m.content = ad::parameter(std::move(c));
  return m;
}

namespace graph {

Encoded encode(const VaeModel& model, const ad::Var& images) {
  const ad::Var out = model.encoder.forward(images);
  check_finite(out->value, "encode");
  Encoded e;
  e.u = ad::slice_cols(out, 0, 2);
  const ad::Var u1 = ad::slice_cols(out, 0, 1);
  const ad::Var u2 = ad::slice_cols(out, 1, 2);
  for (int b = 0; b < out->value.rows(); ++b) {
    if (u1->value(b, 0) == 0.0 && u2->value(b, 0) == 0.0) {
      throw NumericError("encode: zero mean vector at batch index " + std::to_string(b));
    }
  }
  e.mu = ad::atan2(u2, u1);
  e.log_var = ad::clamp(ad::slice_cols(out, 2, 3), kMinLogVar, kMaxLogVar);
  return e;
}

ad::Var reparametrize(const ad::Var& mu, const ad::Var& log_var, const ad::Tensor& epsilon) {
  const ad::Var sigma = ad::exp(ad::scale(log_var, 0.5));
  return ad::add(mu, ad::mul(sigma, ad::constant(epsilon)));
}

ad::Var embed(const ad::Var& theta, const ad::Var& content, int k) {
  if (content->value.rows() != 1 || content->value.cols() != 2 * k) {
    throw ShapeError("embed: content has shape " + content->value.shape_string() + ", expected 1x" +
                     std::to_string(2 * k));
  }
  std::vector<ad::Var> cols;
  cols.reserve(static_cast<std::size_t>(2 * k));
  for (int f = 1; f <= k; ++f) {
    const ad::Var angle = ad::scale(theta, static_cast<double>(f));
    const ad::Var c = ad::cos(angle);
    const ad::Var s = ad::sin(angle);
    const ad::Var a = ad::slice_cols(content, 2 * (f - 1), 2 * f - 1);
    const ad::Var b = ad::slice_cols(content, 2 * f - 1, 2 * f);
    cols.push_back(ad::sub(ad::mul(c, a), ad::mul(s, b)));
    cols.push_back(ad::add(ad::mul(s, a), ad::mul(c, b)));
  }
  return ad::concat(cols);
}

ad::Var decode_logits(const VaeModel& model, const ad::Var& z) {
  ad::Var logits = model.decoder.forward(z);
  check_finite(logits->value, "decode");
  return logits;
}

Loss batch_loss(const VaeModel& model, const ad::Tensor& images, const ad::Tensor& epsilon) {
  const int batch = images.rows();
  if (batch < 1) throw InvalidArgument("empty batch");
  if (epsilon.rows() != batch || epsilon.cols() != 1) {
    throw ShapeError("batch_loss: epsilon has shape " + epsilon.shape_string());
  }
  const Encoded e = encode(model, ad::constant(images));
  const ad::Var theta = reparametrize(e.mu, e.log_var, epsilon);
  const ad::Var logits = decode_logits(model, embed(theta, model.content, model.k()));
  const ad::Var bce = ad::bce_with_logits(logits, images);
  const ad::Var kl = ad::sum(ad::relu(ad::shift(ad::scale(e.log_var, -0.5), kKlOffset)));
  const double inv = 1.0 / batch;
  Loss out;
  out.bce = bce->value.item() * inv;
  out.kl = kl->value.item() * inv;
  out.total = ad::scale(ad::add(bce, ad::scale(kl, model.hyper.beta)), inv);
  return out;
}

}  // namespace graph

std::vector<EncoderOutput> encode_batch(const VaeModel& model, const std::vector<const Image1D*>& images) {
  if (images.empty()) return {};
  const auto e = graph::encode(model, ad::constant(stack_images(images, model.width)));
  std::vector<EncoderOutput> out(images.size());
  for (std::size_t b = 0; b < images.size(); ++b) {
    const int i = static_cast<int>(b);
    const double u1 = e.u->value(i, 0);
    const double u2 = e.u->value(i, 1);
    const double n = std::hypot(u1, u2);
    out[b].u1 = u1 / n;
    out[b].u2 = u2 / n;
    out[b].mu = canonical_angle(e.mu->value(i, 0));
    out[b].log_var = e.log_var->value(i, 0);
  }
  return out;
}

EncoderOutput encode(const VaeModel& model, const Image1D& image) { return encode_batch(model, {&image}).front(); }

Rotation reparametrize(double mu, double log_var, double epsilon) {
  return Rotation::from_angle(mu + std::exp(0.5 * log_var) * epsilon);
}

IrrepEmbedding irrep_matrix(double theta, int k) {
  if (k < 1) throw InvalidArgument("K must be at least 1");
  if (!std::isfinite(theta)) throw InvalidArgument("angle must be finite");
  IrrepEmbedding e;
  e.k = k;
  e.theta = theta;
  e.matrix = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  for (int f = 1; f <= k; ++f) {
    const double c = std::cos(f * theta);
    const double s = std::sin(f * theta);
    const int o = 2 * (f - 1);
    e.matrix(o, o) = c;
    e.matrix(o, o + 1) = -s;
    e.matrix(o + 1, o) = s;
    e.matrix(o + 1, o + 1) = c;
  }
  return e;
}

Image1D decode(const VaeModel& model, const IrrepEmbedding& embedding) {
  if (embedding.k != model.k()) {
    throw InvalidArgument("embedding has K = " + std::to_string(embedding.k) + " but the model has K = " +
                          std::to_string(model.k()));
  }
  const auto& cv = model.content->value.data();
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(cv.data(), static_cast<long>(cv.size()));
  const Eigen::VectorXd z = embedding.matrix * c;
  const ad::Var logits =
      graph::decode_logits(model, ad::constant(ad::Tensor(1, 2 * model.k(), std::vector<double>(z.data(), z.data() + z.size()))));
  const ad::Var probs = ad::sigmoid(logits);
  std::vector<double> px = probs->value.data();
  for (double& p : px) p = std::clamp(p, kOutputFloor, 1.0 - kOutputFloor);
  return Image1D(std::move(px), 1.0);
}

double kl_term(double log_var) { return std::max(0.0, kKlOffset - 0.5 * log_var); }

LossTerms loss_terms(const VaeModel& model, const Image1D& image, double theta_sample, double mu, double log_var) {
  (void)mu;
  if (image.width() != model.width) {
    throw InvalidArgument("image width " + std::to_string(image.width()) + " does not match model width " +
                          std::to_string(model.width));
  }
  ad::Tensor target(1, model.width, image.pixels());
  const ad::Var logits =
      graph::decode_logits(model, graph::embed(ad::constant(ad::Tensor::scalar(theta_sample)), model.content, model.k()));
  LossTerms t;
  t.bce = ad::bce_with_logits(logits, target)->value.item();
  t.kl = kl_term(log_var);
  t.total = t.bce + model.hyper.beta * t.kl;
  return t;
}

double loss(const VaeModel& model, const Image1D& image, double theta_sample, double mu, double log_var) {
  return loss_terms(model, image, theta_sample, mu, log_var).total;
}

PosteriorGradient posterior_gradient(const VaeModel& model, const Image1D& image, double mu, double log_var,
                                     double epsilon) {
  if (image.width() != model.width) throw InvalidArgument("image width does not match model width");
  const ad::Var m = ad::parameter(ad::Tensor::scalar(mu));
  const ad::Var lv = ad::parameter(ad::Tensor::scalar(log_var));
  const ad::Var theta = graph::reparametrize(m, lv, ad::Tensor::scalar(epsilon));
  const ad::Var logits = graph::decode_logits(model, graph::embed(theta, model.content, model.k()));
  const ad::Var bce = ad::bce_with_logits(logits, ad::Tensor(1, model.width, image.pixels()));
  const ad::Var kl = ad::relu(ad::shift(ad::scale(lv, -0.5), kKlOffset));
  const ad::Var total = ad::add(bce, ad::scale(kl, model.hyper.beta));
  ad::backward(total);
  return {total->value.item(), m->grad.item(), lv->grad.item()};
}

std::vector<EpochRecord> TrainResult::history() const {
  std::vector<EpochRecord> all;
  for (const auto& r : restarts) all.insert(all.end(), r.epochs.begin(), r.epochs.end());
  return all;
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

EpochRecord evaluate_split(const VaeModel& model, const Dataset& dataset, Split split) {
  const auto idx = dataset.indices(split);
  if (idx.empty()) throw InsufficientData("evaluation split is empty");
  std::vector<const Image1D*> images;
  images.reserve(idx.size());
  for (auto i : idx) images.push_back(&dataset.samples[i].image);
  const auto l = graph::batch_loss(model, stack_images(images, model.width),
                                   ad::Tensor(static_cast<int>(idx.size()), 1));
  EpochRecord r;
  r.val_loss = l.total->value.item();
  r.val_bce = l.bce;
  r.val_kl = l.kl;
  return r;
}

namespace {

bool record_finite(const EpochRecord& r) {
  return std::isfinite(r.train_loss) && std::isfinite(r.val_loss) && std::isfinite(r.val_bce) &&
         std::isfinite(r.val_kl);
}

struct RestartOutcome {
  RestartRecord record;
  VaeModel model;
};

RestartOutcome train_restart(const Dataset& dataset, const VaeHyperparams& hyper, int restart) {
  RestartOutcome out;
  out.record.restart = restart;
  out.record.seed = restart_seed(hyper.seed, restart);
  out.model = make_model(dataset.raster.width, hyper, out.record.seed);
  VaeModel& model = out.model;
  RestartRecord& rec = out.record;

  std::mt19937_64 rng(rec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::size_t> train_idx = dataset.indices(Split::train);
  if (train_idx.empty()) throw InsufficientData("training split is empty");
  Adam adam(model.parameters(), AdamConfig{hyper.lr});

  rec.initial = evaluate_split(model, dataset, Split::validation);
  rec.initial.restart = restart;
  rec.final_val_loss = rec.initial.val_loss;

  try {
    for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
      std::shuffle(train_idx.begin(), train_idx.end(), rng);
      double loss_sum = 0.0;
      for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(hyper.batch_size)) {
        const std::size_t end = std::min(train_idx.size(), start + static_cast<std::size_t>(hyper.batch_size));
        std::vector<const Image1D*> images;
        for (std::size_t i = start; i < end; ++i) images.push_back(&dataset.samples[train_idx[i]].image);
        ad::Tensor eps(static_cast<int>(images.size()), 1);
        for (double& e : eps.data()) e = normal(rng);
        const auto l = graph::batch_loss(model, stack_images(images, model.width), eps);
        const double value = l.total->value.item();
        if (!std::isfinite(value)) throw TrainingDivergence(adam.steps() + 1, "non-finite training loss");
        ad::backward(l.total);
        adam.step();
        loss_sum += value * static_cast<double>(images.size());
      }
      EpochRecord r = evaluate_split(model, dataset, Split::validation);
      r.restart = restart;
      r.epoch = epoch;
      r.train_loss = loss_sum / static_cast<double>(train_idx.size());
      if (!record_finite(r)) throw TrainingDivergence(adam.steps(), "non-finite validation loss");
      rec.epochs.push_back(r);
      rec.final_val_loss = r.val_loss;
    }
  } catch (const TrainingDivergence& e) {
    rec.diverged = true;
    rec.failure = e.what();
  } catch (const NumericError& e) {
    rec.diverged = true;
    rec.failure = e.what();
  }
  return out;
}

}  // namespace

TrainResult train(const Dataset& dataset, const VaeHyperparams& hyper) {
  hyper.validate();
  if (dataset.indices(Split::validation).empty()) {
    throw InvalidArgument("dataset has no validation split");
  }
  TrainResult result;
  std::optional<VaeModel> best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < hyper.restarts; ++r) {
    RestartOutcome o = train_restart(dataset, hyper, r);
    if (!o.record.diverged && o.record.final_val_loss < best_loss) {
      best_loss = o.record.final_val_loss;
      best = std::move(o.model);
      result.selected_restart = r;
    }
    result.restarts.push_back(std::move(o.record));
  }
  if (!best) {
    throw TrainingFailure("all " + std::to_string(hyper.restarts) + " restarts diverged; first failure: " +
                          result.restarts.front().failure);
  }
  result.model = std::move(*best);
  return result;
}

SearchResult search_architectures(const Dataset& dataset, const VaeHyperparams& base, const std::vector<int>& depths,
                                  const std::vector<int>& widths) {
  if (depths.empty() || widths.empty()) throw InvalidArgument("search grid is empty");
  SearchResult out;
  double best_loss = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int enc_depth : depths) {
    for (int dec_depth : depths) {
      for (int width : widths) {
        if (enc_depth < 1 || dec_depth < 1) throw InvalidArgument("search depths must be positive");
        VaeHyperparams h = base;
        h.encoder_hidden.assign(static_cast<std::size_t>(enc_depth), width);
        h.decoder_hidden.assign(static_cast<std::size_t>(dec_depth), width);
        SearchEntry entry;
        entry.hyper = h;
        try {
          TrainResult r = train(dataset, h);
          entry.best_val_loss = r.restarts[static_cast<std::size_t>(r.selected_restart)].final_val_loss;
          if (entry.best_val_loss < best_loss) {
            best_loss = entry.best_val_loss;
            out.best = std::move(r);
            out.best_hyper = h;
            found = true;
          }
        } catch (const TrainingFailure&) {
          entry.failed = true;
          entry.best_val_loss = std::numeric_limits<double>::infinity();
        }
        out.entries.push_back(entry);
      }
    }
  }
  if (!found) throw TrainingFailure("every architecture in the search grid failed to train");
  return out;
}

}  // namespace orbitpose
