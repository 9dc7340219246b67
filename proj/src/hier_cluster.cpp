#include "omicq/hier_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

std::size_t CondensedDistances::index(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

CondensedDistances pairwise_euclidean(const Matrix& x) {
  const std::size_t m = x.cols();
  if (m < 2) throw ValidationError("pairwise distances need at least two columns");
  for (double v : x.data())
    if (std::isnan(v)) throw ValidationError("NaN in distance input");
  const Matrix t = x.transposed();
  CondensedDistances out;
  out.n = m;
  out.d.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    const auto a = t.row(i);
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto b = t.row(j);
      double ss = 0.0;
      for (std::size_t r = 0; r < a.size(); ++r) ss += (a[r] - b[r]) * (a[r] - b[r]);
      out.d.push_back(std::sqrt(ss));
    }
  }
  return out;
}

namespace {

using Key = std::tuple<double, std::size_t, std::size_t>;

}  // namespace

LinkageTable ward_linkage(const CondensedDistances& dist) {
  const std::size_t n = dist.n;
  if (n < 2) throw ValidationError("linkage needs at least two items");
  if (dist.d.size() != n * (n - 1) / 2) throw ValidationError("condensed distance length mismatch");

  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = dist.d[dist.index(i, j)];

  std::vector<std::size_t> id(n), size(n, 1), best(n, 0);
  std::iota(id.begin(), id.end(), 0);
  std::vector<bool> active(n, true);

  auto key = [&](std::size_t a, std::size_t b) {
    return Key{d[a * n + b], std::min(id[a], id[b]), std::max(id[a], id[b])};
  };
  auto refresh = [&](std::size_t i) {
    bool found = false;
    Key k{};
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      const Key c = key(i, j);
      if (!found || c < k) {
        k = c;
        best[i] = j;
        found = true;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  LinkageTable out;
  out.n = n;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t s = n;
    Key k{};
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const Key c = key(i, best[i]);
      if (s == n || c < k) {
        k = c;
        s = i;
      }
    }
    std::size_t t = best[s];
    const double h = d[s * n + t];
    out.merges.push_back({std::min(id[s], id[t]), std::max(id[s], id[t]), h, size[s] + size[t]});

    // Slot s takes the merged cluster; t retires.
    const double ns = static_cast<double>(size[s]);
    const double nt = static_cast<double>(size[t]);
    for (std::size_t v = 0; v < n; ++v) {
      if (!active[v] || v == s || v == t) continue;
      const double nv = static_cast<double>(size[v]);
      const double dvs = d[v * n + s];
      const double dvt = d[v * n + t];
      const double sq = ((nv + ns) * dvs * dvs + (nv + nt) * dvt * dvt - nv * h * h) / (nv + ns + nt);
      d[v * n + s] = d[s * n + v] = std::sqrt(std::max(0.0, sq));
    }
    active[t] = false;
    size[s] += size[t];
    id[s] = n + step;

    if (step + 2 == n) break;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i] || i == s) continue;
      if (best[i] == s || best[i] == t) {
        refresh(i);
      } else if (key(i, s) < key(i, best[i])) {
        best[i] = s;
      }
    }
    refresh(s);
  }
  return out;
}

CutCriterion cut_criterion_from_string(const std::string& s) {
  if (s == "maxclust") return CutCriterion::MaxClust;
  if (s == "distance") return CutCriterion::Distance;
  throw ValidationError("unknown cut criterion '" + s + "'");
}

std::vector<int> cut_tree(const LinkageTable& link, CutCriterion criterion, double value) {
  const std::size_t n = link.n;
  std::size_t apply = 0;
  if (criterion == CutCriterion::MaxClust) {
    if (!(value >= 1.0) || value > static_cast<double>(n) || value != std::floor(value))
      throw ValidationError("maxclust must be an integer in [1, n]");
    apply = n - static_cast<std::size_t>(value);
  } else {
    if (!(value >= 0.0)) throw ValidationError("distance threshold must be >= 0");
    while (apply < link.merges.size() && link.merges[apply].height <= value) ++apply;
  }

  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t k = 0; k < apply; ++k) {
    const auto& m = link.merges[k];
    parent[find(m.left)] = n + k;
    parent[find(m.right)] = n + k;
  }

  std::vector<int> labels(n, 0);
  std::vector<int> root_label(2 * n, 0);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_label[r] == 0) root_label[r] = ++next;
    labels[i] = root_label[r];
  }
  return labels;
}

namespace {

std::vector<double> abs_column_sums(const Matrix& x) {
  std::vector<double> s(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) s[c] += std::fabs(x(r, c));
  return s;
}

int label_count(const Matrix& x, const std::vector<int>& labels) {
  if (labels.size() != x.cols()) throw ValidationError("one cluster label per column required");
  int hi = 0;
  for (int l : labels) {
    if (l < 1) throw ValidationError("cluster labels are 1-based");
    hi = std::max(hi, l);
  }
  return hi;
}

}  // namespace

std::vector<double> cluster_importance(const Matrix& x, const std::vector<int>& labels) {
  const int k = label_count(x, labels);
  const auto s = abs_column_sums(x);
  std::vector<double> out(static_cast<std::size_t>(k), 0.0);
  for (std::size_t c = 0; c < labels.size(); ++c) out[static_cast<std::size_t>(labels[c] - 1)] += s[c];
  return out;
}

std::vector<std::size_t> top_k_per_cluster(const Matrix& x, const std::vector<int>& labels, std::size_t k) {
  if (k < 1) throw ValidationError("k must be at least 1");
  const int nclust = label_count(x, labels);
  const auto s = abs_column_sums(x);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(nclust));
  for (std::size_t c = 0; c < labels.size(); ++c) members[static_cast<std::size_t>(labels[c] - 1)].push_back(c);
  std::vector<std::size_t> out;
  for (auto& m : members) {
    std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    for (std::size_t i = 0; i < std::min(k, m.size()); ++i) out.push_back(m[i]);
  }
  return out;
}

std::string format_linkage(const LinkageTable& link) {
  std::string out = "left\tright\theight\tsize\n";
  for (const auto& m : link.merges)
    out += std::to_string(m.left) + "\t" + std::to_string(m.right) + "\t" + format_double(m.height) + "\t" +
           std::to_string(m.size) + "\n";
  return out;
}

std::string format_cluster_labels(const std::vector<std::string>& ids, const std::vector<int>& labels) {
  if (ids.size() != labels.size()) throw ValidationError("one cluster label per feature required");
  std::string out = "feature_id\tcluster\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out += ids[i] + "\t" + std::to_string(labels[i]) + "\n";
  return out;
}

}  // namespace omicq
