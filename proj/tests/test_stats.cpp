#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "omicq/errors.hpp"
#include "omicq/stats.hpp"

using namespace omicq;

namespace {

LabeledDataset two_class(const std::vector<double>& lusc, const std::vector<double>& luad) {
  LabeledDataset d;
  d.feature_ids = {"g"};
  d.values = Matrix(lusc.size() + luad.size(), 1);
  std::size_t r = 0;
  for (double v : lusc) {
    d.sample_ids.push_back("s" + std::to_string(r));
    d.labels.push_back(0);
    d.values(r++, 0) = v;
  }
  for (double v : luad) {
    d.sample_ids.push_back("s" + std::to_string(r));
    d.labels.push_back(1);
    d.values(r++, 0) = v;
  }
  return d;
}

FeatureStats with_p(std::string id, double p) {
  FeatureStats s;
  s.feature_id = std::move(id);
  s.p_value = p;
  return s;
}

}  // namespace

TEST_CASE("column_means") {
  auto d = two_class({7.0}, {2.0, 4.0});
  CHECK(column_means(d, 1)[0] == 3.0);
  CHECK(column_means(d, 0)[0] == 7.0);
  auto one = two_class({1.0, 2.0}, {});
  CHECK_THROWS_AS(column_means(one, 1), ValidationError);
}

TEST_CASE("t statistic hand values") {
  auto d = two_class({1, 2, 3}, {4, 5, 6});
  auto paper = t_statistic(d, TMode::Paper)[0];
  CHECK(paper.t_stat == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(paper.mean_lusc == 2.0);
  CHECK(paper.sd_luad == 1.0);
  CHECK(paper.df == 4.0);
  auto welch = t_statistic(d, TMode::Welch)[0];
  CHECK(welch.t_stat == doctest::Approx(-3.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK(welch.p_value == doctest::Approx(oracle::t_two_sided(welch.t_stat, welch.df)).epsilon(1e-8));

  auto same = t_statistic(two_class({1, 2, 3}, {3, 2, 1}))[0];
  CHECK(same.t_stat == 0.0);
  CHECK(same.p_value == 1.0);
}

TEST_CASE("zero denominator") {
  auto shifted = t_statistic(two_class({1, 1}, {2, 2}))[0];
  CHECK(shifted.t_stat == -INFINITY);
  CHECK(shifted.p_value == 0.0);
  auto flat = t_statistic(two_class({1, 1}, {1, 1}))[0];
  CHECK(flat.t_stat == 0.0);
  CHECK(flat.p_value == 1.0);
}

TEST_CASE("p_value against quadrature") {
  CHECK(p_value(0.0, 5.0) == 1.0);
  CHECK(p_value(2.0, 10.0) == doctest::Approx(oracle::t_two_sided(2.0, 10.0)).epsilon(1e-8));
  CHECK(std::fabs(p_value(2.0, 10.0) - oracle::t_two_sided(2.0, 10.0)) < 1e-8);
  CHECK(p_value(-1.7, 7.5) == p_value(1.7, 7.5));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.0, 6.0), df(1.0, 60.0);
  double prev = 1.0;
  for (double x = 0.25; x < 8.0; x += 0.25) {
    const double p = p_value(x, 12.0);
    CHECK(p < prev);
    prev = p;
  }
  for (int i = 0; i < 50; ++i) {
    const double tv = t(rng), dv = df(rng);
    CHECK(std::fabs(p_value(tv, dv) - oracle::t_two_sided(tv, dv)) < 1e-8);
  }
  CHECK_THROWS_AS(p_value(1.0, 0.0), ValidationError);
}

TEST_CASE("incomplete beta edges") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, 1) = x and I_x(a, 1) = x^a
  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(incomplete_beta(3.0, 1.0, 0.5) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("split_by_pvalue") {
  std::vector<FeatureStats> s{with_p("d", 0.9), with_p("a", 0.01), with_p("c", 0.6), with_p("b", 0.02)};
  auto out = split_by_pvalue(s, {{0.0, 0.05, 2}, {0.05, 1.0, 2}});
  CHECK(out[0] == std::vector<std::string>{"a", "b"});
  CHECK(out[1] == std::vector<std::string>{"c", "d"});

  auto capped = split_by_pvalue(s, {{0.0, 0.05, 1}, {0.05, 0.5, 0}, {0.5, 1.0, 0}});
  CHECK(capped[0] == std::vector<std::string>{"a"});
  CHECK(capped[1].empty());
  CHECK(capped[2].size() == 2);

  std::vector<FeatureStats> dna{with_p("x", 8.42e-25), with_p("y", 4.99e-2), with_p("z", 0.999), with_p("w", 1e-4)};
  auto three = split_by_pvalue(dna, {{0.0, 1e-3, 0}, {1e-3, 0.05, 0}, {0.05, 1.0, 0}});
  REQUIRE(three.size() == 3);
  CHECK(three[0] == std::vector<std::string>{"x", "w"});
  CHECK(three[1] == std::vector<std::string>{"y"});
  CHECK(three[2] == std::vector<std::string>{"z"});

  std::vector<FeatureStats> tied{with_p("b", 0.5), with_p("a", 0.5), with_p("z", 0.0)};
  auto t = split_by_pvalue(tied, {{0.0, 1.0, 0}});
  CHECK(t[0] == std::vector<std::string>{"z", "a", "b"});

  CHECK_THROWS_AS(split_by_pvalue(s, {{0.5, 0.2, 0}}), ValidationError);
  CHECK_THROWS_AS(split_by_pvalue(s, {{0.0, 0.5, 0}, {0.4, 1.0, 0}}), ValidationError);
}
