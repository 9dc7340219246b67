#include <doctest.h>

#include "qnn_check.hpp"
#include "omicq/adam.hpp"
#include "omicq/errors.hpp"
#include "omicq/omics_io.hpp"
#include "omicq/tsv.hpp"

using namespace omicq;
using qnn_check::small_config;

namespace {

LabeledDataset blobs(std::size_t n_per_class, std::size_t p, double effect, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_lusc = spec.n_luad = n_per_class;
  SyntheticOmicSpec o;
  o.n_features = p;
  o.effects = {{p, effect}};
  o.decimals = -1;
  spec.omics = {o};
  auto c = generate_synthetic_cohort(spec, seed);
  return join_clinical(c.omics[0], c.clinical);
}

}  // namespace

TEST_CASE("presets") {
  auto q256 = QnnConfig::preset("qnn256");
  CHECK(q256.n_features == 256);
  CHECK(q256.n_qubits == 8);
  CHECK(q256.depth == 5);
  CHECK(q256.dense_width == 256);
  CHECK(QnnConfig::preset("qnn64").n_qubits == 6);
  CHECK(QnnConfig::preset("qnn32").dense_width == 32);
  CHECK_THROWS_AS(QnnConfig::preset("qnn16"), ValidationError);
  auto bad = small_config(3, 2, 4);
  bad.n_features = 9;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(qnn_config_from_json(to_json(q256)).dense_width == 256);
}

TEST_CASE("forward of zero parameters is one half") {
  auto c = small_config(3, 2, 4);
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(forward(c, QnnParams::zeros(c), x) == 0.5);
  CHECK_THROWS_AS(forward(c, QnnParams::zeros(c), std::vector<double>{1, 2}), ValidationError);
}

TEST_CASE("forward matches dense circuit simulation") {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 10; ++i) {
    auto c = small_config(2 + i % 3, 1 + i % 3, 3 + i % 4);
    auto p = qnn_check::random_params(c, rng);
    auto x = qnn_check::random_input(c.n_features, rng);
    CHECK(std::fabs(forward(c, p, x) - qnn_check::dense_forward(c, p, x)) < 1e-10);
  }
}

TEST_CASE("bce loss") {
  std::vector<double> half{0.5};
  std::vector<int> one{1};
  CHECK(bce_loss(half, one) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  std::vector<double> perfect{1.0, 0.0};
  std::vector<int> y{1, 0};
  CHECK(bce_loss(perfect, y) <= 1.1e-7);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::vector<double> p(20);
  std::vector<int> l(20);
  double expect = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    p[i] = u(rng);
    l[i] = static_cast<int>(i % 3 == 0);
    expect -= (l[i] * std::log(p[i]) + (1 - l[i]) * std::log(1 - p[i])) / 20;
  }
  CHECK(std::fabs(bce_loss(p, l) - expect) < 1e-12);
  CHECK_THROWS_AS(bce_loss(p, one), ValidationError);
}

TEST_CASE("gradients agree with finite differences") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 5; ++i) {
    auto c = small_config(3 + i % 3, 2 + i % 2, 4);
    auto p = qnn_check::random_params(c, rng);
    Matrix x(3, c.n_features);
    for (std::size_t r = 0; r < 3; ++r) {
      auto v = qnn_check::random_input(c.n_features, rng);
      std::copy(v.begin(), v.end(), x.row(r).begin());
    }
    auto check = qnn_check::check_gradients(c, p, x, {1, 0, 1});
    CHECK(check.violations == 0);
  }
}

TEST_CASE("gradient batch-mean invariance and clamp") {
  std::mt19937_64 rng(13);
  auto c = small_config(3, 2, 4);
  auto p = qnn_check::random_params(c, rng);
  auto v = qnn_check::random_input(8, rng);
  Matrix one(1, 8), two(2, 8);
  std::copy(v.begin(), v.end(), one.row(0).begin());
  std::copy(v.begin(), v.end(), two.row(0).begin());
  std::copy(v.begin(), v.end(), two.row(1).begin());
  auto g1 = gradients(c, p, one, std::vector<int>{1}).flat();
  auto g2 = gradients(c, p, two, std::vector<int>{1, 1}).flat();
  for (std::size_t k = 0; k < g1.size(); ++k) CHECK(g1[k] == doctest::Approx(g2[k]).epsilon(1e-14));

  // Output pinned far past the clamp: no gradient flows.
  auto sat = p;
  sat.b2 = 100.0;
  auto gs = gradients(c, sat, one, std::vector<int>{0});
  for (double a : gs.angles) CHECK(a == 0.0);
  CHECK(gs.b2 == 0.0);
}

TEST_CASE("adam") {
  std::vector<double> params{1.0, -2.0, 3.0};
  std::vector<double> zero(3, 0.0);
  AdamState st;
  adam_update(params, zero, st);
  CHECK(params == std::vector<double>{1.0, -2.0, 3.0});

  std::vector<double> g{0.5, -3.0, 1e-3};
  AdamState s2;
  auto q = params;
  adam_update(q, g, s2);
  CHECK(q[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(q[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
  CHECK(q[2] == doctest::Approx(3.0 - 0.01 * 1e-3 / (1e-3 + 1e-8)).epsilon(1e-9));

  auto c = small_config(2, 1, 2);
  std::mt19937_64 rng(1);
  auto p = qnn_check::random_params(c, rng);
  auto a = p, b = p;
  AdamState sa, sb;
  for (int i = 0; i < 3; ++i) {
    adam_step(a, p, sa);
    adam_step(b, p, sb);
  }
  CHECK(a == b);
}

TEST_CASE("train") {
  auto d = blobs(60, 8, 2.0, 5);
  auto c = small_config(3, 2, 8);
  c.epochs = 0;
  auto r0 = train(c, d);
  CHECK(r0.history.epochs.empty());
  CHECK(r0.model.params == QnnParams::random(c, derive_seed(c.seed, "qnn-init")));

  c.epochs = 15;
  auto r1 = train(c, d);
  auto r2 = train(c, d);
  CHECK(r1.history.epochs.size() == 15);
  CHECK(r1.model.params == r2.model.params);
  CHECK(r1.history.epochs.back().val_accuracy >= 0.9);
  CHECK(r1.split.test.size() == 24);

  auto back = qnn_model_from_json(to_json(r1.model));
  CHECK(back.params == r1.model.params);
  CHECK(predict_proba(back, d.values) == predict_proba(r1.model, d.values));
}

TEST_CASE("predict_labels threshold") {
  auto c = small_config(2, 1, 2);
  QnnModel m;
  m.config = c;
  m.params = QnnParams::zeros(c);
  m.feature_ids = {"a", "b", "c", "d"};
  Matrix x(2, 4, 1.0);
  m.scaler = Scaler::fit(x, ScalingKind::None);
  CHECK(predict_labels(m, x, 0.5) == std::vector<int>{1, 1});
  CHECK(predict_labels(m, x, 0.6) == std::vector<int>{0, 0});

  std::mt19937_64 rng(2);
  m.params = qnn_check::random_params(c, rng);
  Matrix many(30, 4);
  for (std::size_t r = 0; r < 30; ++r) {
    auto v = qnn_check::random_input(4, rng);
    std::copy(v.begin(), v.end(), many.row(r).begin());
  }
  auto prev = predict_labels(m, many, 0.0);
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    auto cur = predict_labels(m, many, t);
    for (std::size_t i = 0; i < cur.size(); ++i) CHECK(cur[i] <= prev[i]);
    prev = cur;
  }
}
