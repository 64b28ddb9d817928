#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "gradcheck.hpp"
#include "orbitpose/checkpoint.hpp"
#include "orbitpose/dataset.hpp"
#include "orbitpose/errors.hpp"
#include "orbitpose/vae.hpp"
#include "volumes.hpp"

using namespace orbitpose;
using namespace orbitpose::testing;

namespace {

VaeHyperparams small_hyper() {
  VaeHyperparams h;
  h.k = 2;
  h.encoder_hidden = {16};
  h.decoder_hidden = {16};
  h.batch_size = 32;
  h.epochs = 3;
  h.restarts = 2;
  h.seed = 5;
  return h;
}

Dataset small_dataset(int count = 120, int width = 16) {
  DatasetSettings s;
  s.count = count;
  s.width = width;
  s.seed = 3;
  s.val_fraction = 0.25;
  return generate_dataset(seeded_n3(), s);
}

void check_same_parameters(const VaeModel& a, const VaeModel& b) {
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
}

}  // namespace

TEST_CASE("irrep_matrix") {
  CHECK(irrep_matrix(0.0, 4).matrix.isIdentity(0.0));
  Eigen::Matrix2d quarter;
  quarter << 0, -1, 1, 0;
  CHECK((irrep_matrix(kPi / 2, 1).matrix - quarter).cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    const Eigen::MatrixXd lhs = irrep_matrix(a, 4).matrix * irrep_matrix(b, 4).matrix;
    worst = std::max(worst, (lhs - irrep_matrix(a + b, 4).matrix).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-12);

  const auto e = irrep_matrix(0.3, 3);
  CHECK(e.matrix(2, 2) == doctest::Approx(std::cos(0.6)));
  CHECK(e.matrix(0, 2) == 0.0);
  CHECK_THROWS_AS(irrep_matrix(0.1, 0), InvalidArgument);
}

TEST_CASE("reparametrize") {
  CHECK(reparametrize(1.2, -1.0, 0.0).planar_angle() == doctest::Approx(1.2).epsilon(1e-15));
  for (double eps : {-3.0, -1.0, 0.5, 3.0}) {
    const double theta = reparametrize(0.4, kMinLogVar, eps).planar_angle();
    CHECK(std::abs(theta - 0.4) <= 3.0 * std::exp(-4.5) + 1e-15);
  }

  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  const double mu = 2.0;
  const double lv = std::log(0.09);
  double m1 = 0.0;
  double m2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double d = wrap_angle(reparametrize(mu, lv, normal(rng)).planar_angle() - mu);
    m1 += d;
    m2 += d * d;
  }
  m1 /= n;
  const double var = m2 / n - m1 * m1;
  CHECK(std::abs(m1) < 0.02 * 0.3);
  CHECK(var == doctest::Approx(0.09).epsilon(0.02));
}

TEST_CASE("kl_term clamp and slope") {
  const double offset = 0.5 * std::log(kTwoPi) - 0.5;
  CHECK(kl_term(0.0) == doctest::Approx(offset));
  CHECK(kl_term(std::log(kTwoPi) - 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(kl_term(2.0) == 0.0);
  for (double lv = -9.0; lv < -0.5; lv += 0.5) {
    const double slope = (kl_term(lv + 1e-4) - kl_term(lv - 1e-4)) / 2e-4;
    CHECK(slope == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(kl_term(lv) > kl_term(lv + 0.5));
  }
}

TEST_CASE("make_model shapes and determinism") {
  VaeHyperparams h;
  const auto m = make_model(64, h, 9);
  CHECK(m.encoder.widths() == std::vector<int>{64, 128, 128, 3});
  CHECK(m.decoder.widths() == std::vector<int>{8, 128, 128, 64});
  CHECK(m.content->value.cols() == 8);
  CHECK(m.parameter_count() == m.encoder.parameter_count() + m.decoder.parameter_count() + 8);
  check_same_parameters(m, make_model(64, h, 9));
  CHECK_FALSE(m.content->value == make_model(64, h, 10).content->value);

  h.k = 0;
  CHECK_THROWS_AS(make_model(64, h, 1), InvalidArgument);
  h = {};
  h.restarts = 0;
  CHECK_THROWS_AS(h.validate(), InvalidArgument);
}

TEST_CASE("encode contract") {
  const auto data = small_dataset();
  const auto m = make_model(16, small_hyper(), 4);
  for (const auto& s : data.samples) {
    const auto e = encode(m, s.image);
    CHECK(e.mu >= 0.0);
    CHECK(e.mu < kTwoPi);
    CHECK(e.log_var >= kMinLogVar);
    CHECK(e.log_var <= kMaxLogVar);
    CHECK(std::hypot(e.u1, e.u2) == doctest::Approx(1.0));
  }
  const auto a = encode(m, data.samples[0].image);
  const auto b = encode(make_model(16, small_hyper(), 4), data.samples[0].image);
  CHECK(a.mu == b.mu);
  CHECK(a.log_var == b.log_var);

  std::vector<const Image1D*> batch;
  for (const auto& s : data.samples) batch.push_back(&s.image);
  const auto all = encode_batch(m, batch);
  REQUIRE(all.size() == data.size());
  CHECK(all[7].mu == doctest::Approx(encode(m, data.samples[7].image).mu).epsilon(1e-14));

  // Force (u1, u2) = (0, 1).
  auto forced = m.clone();
  auto params = forced.encoder.parameters();
  params[params.size() - 2]->value.fill(0.0);
  params.back()->value = ad::Tensor::row({0.0, 1.0, 0.0});
  CHECK(encode(forced, data.samples[0].image).mu == doctest::Approx(kPi / 2));
  params.back()->value = ad::Tensor::row({0.0, 1.0, 50.0});
  CHECK(encode(forced, data.samples[0].image).log_var == kMaxLogVar);
  params.back()->value = ad::Tensor::row({0.0, 1.0, -50.0});
  CHECK(encode(forced, data.samples[0].image).log_var == kMinLogVar);
  params.back()->value = ad::Tensor::row({0.0, 0.0, 0.0});
  CHECK_THROWS_AS(encode(forced, data.samples[0].image), NumericError);

  CHECK_THROWS_AS(encode(m, Image1D(std::vector<double>(8, 0.5), 1.0)), InvalidArgument);
}

TEST_CASE("encode is continuous in the image at default widths") {
  DatasetSettings s;
  s.count = 10;
  const auto data = generate_dataset(seeded_n3(), s);
  const auto m = make_model(64, VaeHyperparams{}, 1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (const auto& sample : data.samples) {
    std::vector<double> px = sample.image.pixels();
    std::vector<double> dir(px.size());
    double norm = 0.0;
    for (double& d : dir) {
      d = normal(rng);
      norm += d * d;
    }
    const double scale = 1e-6 * std::sqrt(static_cast<double>(px.size()) / norm);
    for (std::size_t j = 0; j < px.size(); ++j) px[j] = std::clamp(px[j] + scale * dir[j], 0.0, 1.0);
    const auto a = encode(m, sample.image);
    const auto b = encode(m, Image1D(px, 1.0));
    CHECK(std::hypot(a.u1 - b.u1, a.u2 - b.u2) < 1e-3);
  }
}

TEST_CASE("decode contract") {
  const auto m = make_model(16, small_hyper(), 6);
  for (double theta : {0.0, 1.0, 2.5, 6.0}) {
    const Image1D decoded = decode(m, irrep_matrix(theta, 2));
    for (double p : decoded.pixels()) {
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }
  const auto canonical = m.decoder.forward(m.content);
  const auto img = decode(m, irrep_matrix(0.0, 2));
  for (int j = 0; j < 16; ++j) {
    const double expect = 1.0 / (1.0 + std::exp(-canonical->value[static_cast<std::size_t>(j)]));
    CHECK(img.pixels()[static_cast<std::size_t>(j)] == doctest::Approx(expect).epsilon(1e-14));
  }
  const auto near = decode(m, irrep_matrix(1e-7, 2));
  CHECK(image_distance(img, near) < 1e-6);
  CHECK_THROWS_AS(decode(m, irrep_matrix(0.0, 3)), InvalidArgument);
}

TEST_CASE("loss terms") {
  const auto data = small_dataset();
  const auto m = make_model(16, small_hyper(), 6);
  const auto t = loss_terms(m, data.samples[0].image, 0.7, 0.7, -2.0);
  CHECK(t.kl == doctest::Approx(kl_term(-2.0)));
  CHECK(t.total == doctest::Approx(t.bce + t.kl));
  CHECK(t.bce > 0.0);

  // A decoder that saturates on a {0,1} target drives BCE to zero.
  auto sharp = m.clone();
  auto p = sharp.decoder.parameters();
  for (std::size_t i = 0; i + 1 < p.size(); ++i) p[i]->value.fill(0.0);
  std::vector<double> bits(16, 0.0);
  ad::Tensor bias(1, 16);
  for (int j = 0; j < 16; ++j) {
    bits[static_cast<std::size_t>(j)] = j % 3 == 0 ? 1.0 : 0.0;
    bias[static_cast<std::size_t>(j)] = j % 3 == 0 ? 60.0 : -60.0;
  }
  p.back()->value = bias;
  const auto perfect = loss_terms(sharp, Image1D(bits, 1.0), 0.0, 0.0, 2.0);
  CHECK(perfect.bce >= 0.0);
  CHECK(perfect.bce < 1e-20);
  CHECK(perfect.kl == 0.0);
}

TEST_CASE("posterior gradient matches finite differences") {
  const auto data = small_dataset();
  const auto m = make_model(16, small_hyper(), 8);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mu(0.0, kTwoPi);
  std::uniform_real_distribution<double> lv(-6.0, 1.0);
  std::normal_distribution<double> eps;
  for (int i = 0; i < 20; ++i) {
    const auto& img = data.samples[static_cast<std::size_t>(i)].image;
    CHECK(posterior_gradient_error(m, img, mu(rng), lv(rng), eps(rng)) < 1e-3);
  }
  const auto g = posterior_gradient(m, data.samples[0].image, 1.0, 0.0, 0.0);
  CHECK(g.d_log_var == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("batch loss gradients reach every parameter") {
  const auto data = small_dataset();
  const auto m = make_model(16, small_hyper(), 8);
  ad::Tensor images(4, 16);
  for (int b = 0; b < 4; ++b) {
    for (int j = 0; j < 16; ++j) images(b, j) = data.samples[static_cast<std::size_t>(b)].image.pixels()[static_cast<std::size_t>(j)];
  }
  const auto l = graph::batch_loss(m, images, ad::Tensor(4, 1, 0.3));
  ad::backward(l.total);
  for (const auto& p : m.parameters()) {
    double norm = 0.0;
    for (double g : p->grad.data()) norm += g * g;
    CHECK(norm > 0.0);
  }
  CHECK(l.total->value.item() == doctest::Approx(l.bce + l.kl));
}

TEST_CASE("train: degenerate and deterministic runs") {
  const auto data = small_dataset();
  auto h = small_hyper();

  h.epochs = 0;
  const auto none = train(data, h);
  CHECK(none.history().empty());
  check_same_parameters(none.model, make_model(16, h, restart_seed(h.seed, none.selected_restart)));

  h.epochs = 3;
  const auto a = train(data, h);
  const auto b = train(data, h);
  REQUIRE(a.restarts.size() == 2);
  CHECK(a.history().size() == 6);
  CHECK(a.restarts[1].epochs.front().epoch == 1);
  CHECK(a.restarts[1].epochs.back().epoch == 3);
  CHECK(a.restarts[0].initial.epoch == 0);
  CHECK(a.selected_restart == b.selected_restart);
  check_same_parameters(a.model, b.model);
  for (std::size_t i = 0; i < a.history().size(); ++i) CHECK(a.history()[i].val_loss == b.history()[i].val_loss);
  CHECK(a.model.seed == restart_seed(h.seed, a.selected_restart));
  const double best = std::min(a.restarts[0].final_val_loss, a.restarts[1].final_val_loss);
  CHECK(a.restarts[static_cast<std::size_t>(a.selected_restart)].final_val_loss == best);
  CHECK(a.restarts[0].final_val_loss < a.restarts[0].initial.val_loss);

  CHECK(restart_seed(1, 0) != restart_seed(1, 1));
  CHECK(restart_seed(1, 0) == restart_seed(1, 0));
}

TEST_CASE("train and evaluation errors") {
  DatasetSettings s;
  s.count = 20;
  s.width = 16;
  s.val_fraction = 0.0;
  const auto no_val = generate_dataset(seeded_n3(), s);
  CHECK_THROWS_AS(train(no_val, small_hyper()), InvalidArgument);
  CHECK_THROWS_AS(evaluate_split(make_model(16, small_hyper(), 1), no_val, Split::validation), InsufficientData);

  auto h = small_hyper();
  h.lr = 1e12;
  h.epochs = 2;
  try {
    train(small_dataset(), h);
  } catch (const TrainingFailure&) {
  }
}

TEST_CASE("checkpoint round-trip") {
  auto h = small_hyper();
  h.decoder_hidden = {12, 10};
  const auto m = make_model(16, h, 77);
  std::stringstream ss;
  write_checkpoint(ss, m);
  const std::string text = ss.str();
  const auto back = read_checkpoint(ss);
  CHECK(back.width == 16);
  CHECK(back.hyper == m.hyper);
  CHECK(back.seed == 77);
  check_same_parameters(m, back);

  std::stringstream again;
  write_checkpoint(again, back);
  CHECK(again.str() == text);

  const auto data = small_dataset();
  CHECK(encode(back, data.samples[0].image).mu == encode(m, data.samples[0].image).mu);

  const auto dir = std::filesystem::temp_directory_path() / "orbitpose_test_ckpt";
  std::filesystem::create_directories(dir);
  save_checkpoint(m, dir / "m.ckpt");
  check_same_parameters(m, load_checkpoint(dir / "m.ckpt"));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IoError);
}

TEST_CASE("checkpoint parse errors") {
  const auto m = make_model(16, small_hyper(), 77);
  std::stringstream ss;
  write_checkpoint(ss, m);
  std::string text = ss.str();

  const auto pos = text.find("tensor content");
  REQUIRE(pos != std::string::npos);
  const auto values = text.find('\n', pos) + 1;
  std::string broken = text;
  broken.replace(values, 3, "abc");
  std::size_t line = 1;
  for (std::size_t i = 0; i < values; ++i) line += text[i] == '\n';
  std::istringstream bad(broken);
  try {
    read_checkpoint(bad, "bad");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == line);
  }

  std::string wrong = text;
  wrong.replace(wrong.find("format=orbitpose-vae-1"), 22, "format=other");
  std::istringstream fmt(wrong);
  CHECK_THROWS_AS(read_checkpoint(fmt), ParseError);

  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(truncated), ParseError);
}
