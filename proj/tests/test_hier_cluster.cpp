#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "omicq/errors.hpp"
#include "omicq/hier_cluster.hpp"

using namespace omicq;

namespace {

// Items as one-row columns.
Matrix line_items(const std::vector<double>& v) {
  Matrix x(1, v.size());
  for (std::size_t j = 0; j < v.size(); ++j) x(0, j) = v[j];
  return x;
}

}  // namespace

TEST_CASE("pairwise_euclidean") {
  Matrix x(2, 3);
  x(0, 1) = 3;
  x(1, 1) = 4;
  auto d = pairwise_euclidean(x);
  CHECK(d.n == 3);
  CHECK(d.at(0, 1) == 5.0);
  CHECK(d.at(0, 2) == 0.0);
  CHECK(d.at(2, 1) == 5.0);
  CHECK_THROWS_AS(pairwise_euclidean(Matrix(2, 1)), ValidationError);
}

TEST_CASE("ward hand case 0 1 10") {
  auto link = ward_linkage(pairwise_euclidean(line_items({0, 1, 10})));
  REQUIRE(link.merges.size() == 2);
  CHECK(link.merges[0].left == 0);
  CHECK(link.merges[0].right == 1);
  CHECK(link.merges[0].height == 1.0);
  CHECK(link.merges[1].left == 2);
  CHECK(link.merges[1].right == 3);
  CHECK(link.merges[1].height == doctest::Approx(19.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(link.merges[1].size == 3);

  CHECK(cut_tree(link, CutCriterion::MaxClust, 2) == std::vector<int>{1, 1, 2});
  CHECK(cut_tree(link, CutCriterion::MaxClust, 3) == std::vector<int>{1, 2, 3});
  CHECK(cut_tree(link, CutCriterion::Distance, INFINITY) == std::vector<int>{1, 1, 1});
  CHECK(cut_tree(link, CutCriterion::Distance, 1.0) == std::vector<int>{1, 1, 2});
  CHECK(cut_tree(link, CutCriterion::Distance, 0.5) == std::vector<int>{1, 2, 3});
  CHECK_THROWS_AS(cut_tree(link, CutCriterion::MaxClust, 0), ValidationError);
  CHECK_THROWS_AS(cut_tree(link, CutCriterion::MaxClust, 4), ValidationError);
}

TEST_CASE("two items merge at their distance") {
  auto link = ward_linkage(pairwise_euclidean(line_items({2, 7.5})));
  REQUIRE(link.merges.size() == 1);
  CHECK(link.merges[0].height == 5.5);
}

TEST_CASE("ward matches naive agglomeration") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 14, dim = 1 + trial % 4;
    Matrix x(dim, n);
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < dim; ++k) pts[j][k] = x(k, j) = g(rng);
    auto link = ward_linkage(pairwise_euclidean(x));
    auto naive = oracle::naive_ward(pts);
    REQUIRE(link.merges.size() == naive.size());
    for (std::size_t s = 0; s < naive.size(); ++s) {
      CHECK(link.merges[s].left == naive[s].left);
      CHECK(link.merges[s].right == naive[s].right);
      CHECK(std::fabs(link.merges[s].height - naive[s].height) < 1e-9);
    }
  }
}

TEST_CASE("cluster_importance and top_k_per_cluster") {
  Matrix x(2, 3);
  x(0, 0) = 1;
  x(1, 0) = -2;
  x(0, 1) = 5;
  x(0, 2) = 0.5;
  x(1, 2) = 0.5;
  auto imp = cluster_importance(x, {1, 2, 2});
  CHECK(imp == std::vector<double>{3.0, 6.0});
  auto solo = cluster_importance(x, {1, 2, 3});
  CHECK(solo[1] + solo[2] == imp[1]);

  CHECK(top_k_per_cluster(x, {1, 2, 2}, 1) == std::vector<std::size_t>{0, 1});
  CHECK(top_k_per_cluster(x, {1, 2, 2}, 5) == std::vector<std::size_t>{0, 1, 2});
  CHECK(top_k_per_cluster(x, {2, 1, 1}, 1) == std::vector<std::size_t>{1, 0});
}
