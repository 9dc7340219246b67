#include <doctest.h>

#include <filesystem>
#include <random>

#include "qnn_check.hpp"
#include "omicq/errors.hpp"
#include "omicq/importance.hpp"
#include "omicq/tsv.hpp"

using namespace omicq;

namespace {

LabeledDataset dataset(const Matrix& x, const std::vector<int>& y) {
  LabeledDataset d;
  d.values = x;
  d.labels = y;
  for (std::size_t i = 0; i < x.rows(); ++i) d.sample_ids.push_back("s" + std::to_string(i));
  for (std::size_t j = 0; j < x.cols(); ++j) d.feature_ids.push_back("f" + std::to_string(j));
  return d;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("gradient importance of a toy head") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Matrix x(25, 3);
  for (auto& v : x.data()) v = g(rng);
  auto imp = gradient_importance([](std::span<const double> v) { return sigmoid(3 * v[0]); }, x);
  double expect = 0;
  for (std::size_t r = 0; r < 25; ++r) {
    const double s = sigmoid(3 * x(r, 0));
    expect += std::fabs(3 * s * (1 - s)) / 25;
  }
  CHECK(imp[0] > 0.0);
  CHECK(std::fabs(imp[0] - expect) < 1e-6);
  CHECK(std::fabs(imp[1]) < 1e-6);
  CHECK(imp[2] == 0.0);
}

TEST_CASE("qnn gradient importance matches central differences") {
  std::mt19937_64 rng(5);
  auto c = qnn_check::small_config(3, 2, 4);
  QnnModel m;
  m.config = c;
  m.params = qnn_check::random_params(c, rng);
  Matrix x(6, 8);
  for (std::size_t r = 0; r < 6; ++r) {
    auto v = qnn_check::random_input(8, rng);
    std::copy(v.begin(), v.end(), x.row(r).begin());
  }
  m.scaler = Scaler::fit(x, ScalingKind::MinMax);
  auto imp = weight_importance(m, x);
  const auto xs = m.scaler.apply(x);
  for (std::size_t j = 0; j < 8; ++j) {
    double expect = 0;
    const double h = 1e-5;
    for (std::size_t r = 0; r < 6; ++r) {
      std::vector<double> up(xs.row(r).begin(), xs.row(r).end()), down = up;
      up[j] += h;
      down[j] -= h;
      expect += std::fabs((forward(c, m.params, up) - forward(c, m.params, down)) / (2 * h)) / 6;
    }
    CHECK(std::fabs(imp[j] - expect) < 1e-5);
  }

  m.params.w2.assign(4, 0.0);
  for (double v : weight_importance(m, x)) CHECK(v == 0.0);
  CHECK_THROWS_AS(weight_importance(m, x, ImportanceMode::Dense), ValidationError);
}

TEST_CASE("class means and association") {
  Matrix x(3, 2);
  x(0, 0) = 2;
  x(1, 0) = 4;
  x(2, 0) = 1;
  x(0, 1) = x(1, 1) = x(2, 1) = 7;
  auto cm = class_mean_levels(dataset(x, {1, 1, 0}));
  CHECK(cm.luad[0] == 3.0);
  CHECK(cm.lusc[0] == 1.0);
  CHECK(cm.luad[1] == cm.lusc[1]);
  CHECK(associate(2, 1) == Association::LUAD);
  CHECK(associate(1, 2) == Association::LUSC);
  CHECK(associate(1, 1) == Association::LUSC);
}

TEST_CASE("build_report ordering") {
  Matrix x(4, 3, 1.0);
  auto d = dataset(x, {0, 0, 1, 1});
  std::vector<FeatureStats> stats(3);
  for (std::size_t j = 0; j < 3; ++j) {
    stats[j].feature_id = d.feature_ids[j];
    stats[j].p_value = j == 1 ? 0.01 : 0.5;
  }
  auto flat = build_report(std::vector<double>{0.0, 0.0, 0.0}, d, stats);
  CHECK(flat[0].feature_id == "f0");
  CHECK(flat[2].feature_id == "f2");
  auto r = build_report(std::vector<double>{0.1, 0.9, 0.1}, d, stats);
  CHECK(r[0].feature_id == "f1");
  CHECK(r[0].significance == Significance::MostSignificant);
  CHECK(r[1].significance == Significance::LessSignificant);
  CHECK(top_n(r, 2).size() == 2);

  auto dir = std::filesystem::temp_directory_path() / "omicq_names_test";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "names.tsv", "feature_id\tname\nf1\tGENE1\n");
  apply_names(r, read_name_map(dir / "names.tsv"));
  CHECK(r[0].name == "GENE1");
  CHECK(r[1].name.empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("separating feature ranks first in a trained report") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const std::size_t n = 80;
  Matrix x(n, 4);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = 5.0 + g(rng) * 0.5 + (j == 2 ? (y[i] ? 2.0 : -2.0) : 0.0);
  }
  auto d = dataset(x, y);
  auto c = qnn_check::small_config(2, 2, 4);
  c.epochs = 20;
  auto res = train(c, d);
  auto rep = build_report(res.model, d, t_statistic(d));
  CHECK(rep[0].feature_id == "f2");
  CHECK(rep[0].association == Association::LUAD);
}

TEST_CASE("tp tn deviation ranking") {
  Matrix x(8, 3, 2.0);
  std::vector<int> y{1, 1, 1, 0, 0, 0, 1, 0};
  std::vector<int> p{1, 1, 1, 0, 0, 0, 0, 1};
  for (std::size_t r = 0; r < 8; ++r) x(r, 1) = static_cast<double>(r % 3);
  for (std::size_t r = 0; r < 3; ++r) x(r, 2) = 10.0;
  auto d = dataset(x, y);
  auto dev = tp_tn_deviation_scores(d, p, 1);
  CHECK(dev.scores[0] == 0.0);
  CHECK(dev.top == std::vector<std::string>{"f2"});
  CHECK(dev.tp_deviation[2] > dev.tn_deviation[2]);
  CHECK(tp_tn_deviation_scores(d, p, 3).top.size() == 3);
  CHECK_THROWS_AS(tp_tn_deviation_scores(d, std::vector<int>(8, 1), 3), ValidationError);
}
