#pragma once

#include <string>
#include <vector>

#include "omicq/matrix.hpp"

namespace omicq {

// Upper triangle of a symmetric distance matrix, row-major over i < j.
struct CondensedDistances {
  std::size_t n = 0;
  std::vector<double> d;

  std::size_t index(std::size_t i, std::size_t j) const;  // requires i != j
  double at(std::size_t i, std::size_t j) const { return i == j ? 0.0 : d[index(i, j)]; }
};

struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

// Singletons are 0..n-1; the cluster formed by merge k gets id n + k.
struct LinkageTable {
  std::size_t n = 0;
  std::vector<Merge> merges;
};

// Distances between the columns of x (features are the clustered items).
CondensedDistances pairwise_euclidean(const Matrix& x);

LinkageTable ward_linkage(const CondensedDistances& dist);

enum class CutCriterion { MaxClust, Distance };
CutCriterion cut_criterion_from_string(const std::string& s);

// 1-based labels, numbered in order of first item appearance.
std::vector<int> cut_tree(const LinkageTable& link, CutCriterion criterion, double value);

// Per-cluster sum of absolute column values; entry c belongs to label c + 1.
std::vector<double> cluster_importance(const Matrix& x, const std::vector<int>& labels);

// Up to k members per cluster ranked by their own absolute-sum score, listed
// cluster by cluster; ties go to the lower column index.
std::vector<std::size_t> top_k_per_cluster(const Matrix& x, const std::vector<int>& labels, std::size_t k);

std::string format_linkage(const LinkageTable& link);
std::string format_cluster_labels(const std::vector<std::string>& ids, const std::vector<int>& labels);

}  // namespace omicq
