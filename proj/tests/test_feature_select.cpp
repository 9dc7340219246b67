#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "omicq/errors.hpp"
#include "omicq/feature_select.hpp"

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

std::vector<int> alternating(std::size_t n) {
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
  return y;
}

ScoreTable table(std::vector<ScoreEntry> e) { return ScoreTable{ScoreMethod::MI, std::move(e)}; }

}  // namespace

TEST_CASE("discretize") {
  std::vector<double> x{0, 1, 2, 3};
  CHECK(discretize(x, 2) == std::vector<int>{0, 0, 1, 1});
  std::vector<double> flat{4, 4, 4};
  CHECK(discretize(flat, 10) == std::vector<int>{0, 0, 0});
  CHECK(discretize(x, 4) == std::vector<int>{0, 1, 2, 3});
  CHECK_THROWS_AS(discretize(x, 1), ValidationError);
}

TEST_CASE("mutual information hand cases") {
  const std::size_t n = 40;
  Matrix x(n, 2);
  auto y = alternating(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = y[i];
    x(i, 1) = static_cast<double>(i / 2 % 5);
  }
  auto s = mutual_info_scores(dataset(x, y));
  CHECK(s.entries[0].score == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(std::fabs(s.entries[1].score) < 1e-12);
}

TEST_CASE("mutual information and chi-square against exhaustive sums") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> xs(0, 3), ys(0, 1 + trial % 3);
    std::vector<int> x(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
      x[i] = xs(rng);
      y[i] = ys(rng);
    }
    CHECK(std::fabs(mutual_information(x, y) - oracle::mutual_information(x, y)) < 1e-10);
    CHECK(std::fabs(chi_square(x, y) - oracle::chi_square(x, y)) < 1e-10);
  }
}

TEST_CASE("chi-square tables") {
  CHECK(chi_square_table({{10, 10}, {10, 10}}) == 0.0);
  CHECK(chi_square_table({{20, 0}, {0, 20}}) == 40.0);
  std::vector<int> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i < 20 ? 0 : 1);
    y.push_back(i < 20 ? 0 : 1);
  }
  CHECK(chi_square(x, y) == 40.0);
}

TEST_CASE("chi-square scores rank the separating feature") {
  const std::size_t n = 60;
  auto y = alternating(n);
  Matrix x(n, 2);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = y[i] * 3.0 + 0.1 * g(rng);
    x(i, 1) = g(rng);
  }
  auto s = chi_square_scores(dataset(x, y));
  CHECK(s.entries[0].score > s.entries[1].score);
}

TEST_CASE("pca scores match a Jacobi eigendecomposition") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const std::size_t n = 30, p = 6;
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = g(rng) * (1.0 + static_cast<double>(j)) + (j == 1 ? x(i, 0) : 0.0);
  auto y = alternating(n);
  auto d = dataset(x, y);

  std::vector<std::vector<double>> z(p, std::vector<double>(n));
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0, ss = 0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j) / n;
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
    for (std::size_t i = 0; i < n; ++i) z[j][i] = (x(i, j) - mean) / std::sqrt(ss / (n - 1));
  }
  std::vector<std::vector<double>> cov(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      for (std::size_t i = 0; i < n; ++i) cov[a][b] += z[a][i] * z[b][i] / (n - 1);
  auto eig = oracle::jacobi(cov);

  for (std::size_t k : {1, 3, 6}) {
    auto s = pca_feature_scores(d, k);
    auto gram = pca_feature_scores(d, k, PcaRoute::Gram);
    for (std::size_t j = 0; j < p; ++j) {
      double expect = 0;
      for (std::size_t c = 0; c < k; ++c) expect += eig.values[c] * std::fabs(eig.vectors[c][j]) / p;
      CHECK(s.entries[j].score == doctest::Approx(expect).epsilon(1e-9));
      CHECK(gram.entries[j].score == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("pca hand cases") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  const std::size_t n = 200;
  Matrix x(n, 4);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = g(rng);
    x(i, 1) = 2.0 * x(i, 0) + 1.0;
    x(i, 2) = g(rng);
    x(i, 3) = 5.0;
  }
  auto s = pca_feature_scores(dataset(x, alternating(n)), 1);
  CHECK(s.entries[0].score > s.entries[2].score);
  CHECK(s.entries[1].score > s.entries[2].score);
  CHECK(s.entries[3].score == 0.0);

  Matrix one(5, 1);
  for (std::size_t i = 0; i < 5; ++i) one(i, 0) = static_cast<double>(i * i);
  CHECK(pca_feature_scores(dataset(one, alternating(5)), 1).entries[0].score == doctest::Approx(1.0).epsilon(1e-12));

  // Two orthogonal standardized columns share variance equally.
  Matrix orth(4, 2);
  const double a[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j) orth(i, j) = a[i][j];
  auto eq = pca_feature_scores(dataset(orth, alternating(4)), 2);
  CHECK(eq.entries[0].score == doctest::Approx(eq.entries[1].score).epsilon(1e-12));
  CHECK_THROWS_AS(pca_feature_scores(dataset(orth, alternating(4)), 3), ValidationError);
}

TEST_CASE("random forest importances") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const std::size_t n = 120;
  auto y = alternating(n);
  Matrix x(n, 6);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < 6; ++j) x(i, j) = j == 2 ? y[i] * 4.0 + g(rng) * 0.1 : g(rng);
  auto d = dataset(x, y);
  auto s = rf_feature_importances(d, 50, -1, 7);
  for (std::size_t j = 0; j < 6; ++j)
    if (j != 2) CHECK(s.entries[2].score > s.entries[j].score);
  auto again = rf_feature_importances(d, 50, -1, 7);
  for (std::size_t j = 0; j < 6; ++j) CHECK(s.entries[j].score == again.entries[j].score);
}

TEST_CASE("select_k_best") {
  auto t = table({{"a", 0.1}, {"b", 0.9}, {"c", 0.5}});
  CHECK(select_k_best(t, 2) == std::vector<std::string>{"b", "c"});
  CHECK(select_k_best(t, 3) == std::vector<std::string>{"b", "c", "a"});
  auto tie = table({{"z", 0.5}, {"y", 0.5}, {"x", 0.1}});
  CHECK(select_k_best(tie, 1) == std::vector<std::string>{"y"});
  CHECK_THROWS_AS(select_k_best(t, 4), ValidationError);
}

TEST_CASE("venn_partition") {
  auto r = venn_partition({{"a", "b"}, {"b", "c"}});
  CHECK(r.common == std::vector<std::string>{"b"});
  CHECK(r.unique == std::vector<std::string>{"a", "b", "c"});
  CHECK(r.union_minus_common == 2);
  auto same = venn_partition({{"a", "b"}, {"a", "b"}});
  CHECK(same.common == same.unique);
  auto disjoint = venn_partition({{"a"}, {"b"}, {"c"}, {"d"}});
  CHECK(disjoint.common.empty());
  CHECK(disjoint.unique.size() == 4);
}

TEST_CASE("auc_filter") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const std::size_t n = 500;
  auto y = alternating(n);
  Matrix x(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = y[i];
    x(i, 1) = g(rng);
  }
  auto d = dataset(x, y);
  std::vector<std::size_t> tr, te;
  for (std::size_t i = 0; i < n; ++i) (i % 5 == 0 ? te : tr).push_back(i);
  auto train = d.select_samples(tr);
  auto test = d.select_samples(te);
  AucFilterOptions opts;
  opts.n_trees = 50;
  auto r = auc_filter(train, test, {"f0", "f1", "f0"}, opts);
  CHECK(r.kept == std::vector<std::string>{"f0"});
  REQUIRE(r.evaluated.size() == 2);
  CHECK(r.evaluated[0].train_auc == 1.0);
  CHECK(r.evaluated[0].test_auc == 1.0);
  CHECK(r.evaluated[1].test_auc < 0.8);
  opts.threshold = 1.01;
  CHECK(auc_filter(train, test, {"f0", "f1"}, opts).kept.empty());
}
