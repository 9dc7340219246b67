#include "omicq/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "omicq/adam.hpp"
#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

std::string to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::LR: return "lr";
    case BaselineKind::MLP: return "mlp";
    case BaselineKind::RF: return "rf";
  }
  return "?";
}

BaselineKind baseline_kind_from_string(const std::string& s) {
  if (s == "lr") return BaselineKind::LR;
  if (s == "mlp") return BaselineKind::MLP;
  if (s == "rf") return BaselineKind::RF;
  throw ValidationError("unknown baseline '" + s + "'");
}

namespace {

constexpr double kClamp = 1e-7;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_both_classes(const LabeledDataset& d) {
  d.validate();
  bool has0 = false, has1 = false;
  for (int l : d.labels) (l == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw ValidationError("training data must contain both classes");
}

void check_width(const BaselineModel& m, const Matrix& x) {
  if (x.cols() != m.n_features())
    throw ValidationError("expected " + std::to_string(m.n_features()) + " feature columns, got " +
                          std::to_string(x.cols()));
}

}  // namespace

BaselineModel lr_train(const LabeledDataset& d, const LrOptions& opts) {
  require_both_classes(d);
  if (!(opts.C > 0.0)) throw ValidationError("C must be positive");
  BaselineModel m;
  m.kind = BaselineKind::LR;
  m.feature_ids = d.feature_ids;
  m.scaler = Scaler::fit(d.values, opts.scaling);
  m.options = Json{{"C", opts.C}, {"iters", opts.iters}, {"lr", opts.lr}, {"tol", opts.tol},
                   {"scaling", to_string(opts.scaling)}};
  const Matrix x = m.scaler.apply(d.values);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double reg = 1.0 / (opts.C * static_cast<double>(n));
  m.w.assign(p, 0.0);
  std::vector<double> gw(p);
  for (std::size_t it = 0; it < opts.iters; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = x.row(r);
      double z = m.b;
      for (std::size_t j = 0; j < p; ++j) z += m.w[j] * row[j];
      const double err = (sigmoid(z) - d.labels[r]) * inv_n;
      for (std::size_t j = 0; j < p; ++j) gw[j] += err * row[j];
      gb += err;
    }
    double norm2 = gb * gb;
    for (std::size_t j = 0; j < p; ++j) {
      gw[j] += reg * m.w[j];
      norm2 += gw[j] * gw[j];
    }
    if (std::sqrt(norm2) < opts.tol) break;
    for (std::size_t j = 0; j < p; ++j) m.w[j] -= opts.lr * gw[j];
    m.b -= opts.lr * gb;
  }
  return m;
}

double mlp_forward(const BaselineModel& m, std::span<const double> x) {
  const std::size_t p = m.n_features();
  double out = m.b2;
  for (std::size_t u = 0; u < m.hidden; ++u) {
    double a = m.b1[u];
    for (std::size_t j = 0; j < p; ++j) a += m.w1[u * p + j] * x[j];
    if (a > 0.0) out += m.w2[u] * a;
  }
  return sigmoid(out);
}

std::vector<double> mlp_flat(const BaselineModel& m) {
  std::vector<double> v(m.w1);
  v.insert(v.end(), m.b1.begin(), m.b1.end());
  v.insert(v.end(), m.w2.begin(), m.w2.end());
  v.push_back(m.b2);
  return v;
}

void mlp_set_flat(BaselineModel& m, std::span<const double> v) {
  if (v.size() != m.w1.size() + m.b1.size() + m.w2.size() + 1) throw ValidationError("flat MLP length mismatch");
  auto it = v.begin();
  for (auto* part : {&m.w1, &m.b1, &m.w2}) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(part->size()), part->begin());
    it += static_cast<std::ptrdiff_t>(part->size());
  }
  m.b2 = *it;
}

std::pair<double, std::vector<double>> mlp_loss_gradient(const BaselineModel& m, const Matrix& x,
                                                          std::span<const int> y) {
  const std::size_t p = m.n_features();
  const std::size_t h = m.hidden;
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  std::vector<double> g(m.w1.size() + m.b1.size() + m.w2.size() + 1, 0.0);
  double* gw1 = g.data();
  double* gb1 = gw1 + m.w1.size();
  double* gw2 = gb1 + m.b1.size();
  double& gb2 = g.back();
  std::vector<double> pre(h);
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    double out = m.b2;
    for (std::size_t u = 0; u < h; ++u) {
      double a = m.b1[u];
      for (std::size_t j = 0; j < p; ++j) a += m.w1[u * p + j] * row[j];
      pre[u] = a;
      if (a > 0.0) out += m.w2[u] * a;
    }
    const double prob = sigmoid(out);
    const double pc = std::clamp(prob, kClamp, 1.0 - kClamp);
    loss -= (y[r] == 1 ? std::log(pc) : std::log(1.0 - pc)) * inv_n;
    if (prob < kClamp || prob > 1.0 - kClamp) continue;
    const double go = (prob - y[r]) * inv_n;
    gb2 += go;
    for (std::size_t u = 0; u < h; ++u) {
      if (pre[u] <= 0.0) continue;
      gw2[u] += go * pre[u];
      const double gp = go * m.w2[u];
      gb1[u] += gp;
      for (std::size_t j = 0; j < p; ++j) gw1[u * p + j] += gp * row[j];
    }
  }
  return {loss, g};
}

BaselineModel mlp_train(const LabeledDataset& d, const MlpOptions& opts) {
  require_both_classes(d);
  if (opts.hidden < 1) throw ValidationError("hidden width must be at least 1");
  BaselineModel m;
  m.kind = BaselineKind::MLP;
  m.feature_ids = d.feature_ids;
  m.scaler = Scaler::fit(d.values, opts.scaling);
  m.options = Json{{"hidden", opts.hidden}, {"iters", opts.iters}, {"lr", opts.lr}, {"seed", opts.seed},
                   {"scaling", to_string(opts.scaling)}};
  const std::size_t p = d.n_features();
  m.hidden = opts.hidden;
  m.w1.assign(opts.hidden * p, 0.0);
  m.b1.assign(opts.hidden, 0.0);
  m.w2.assign(opts.hidden, 0.0);
  Rng rng(derive_seed(opts.seed, "mlp-init"));
  const double r = 1.0 / std::sqrt(static_cast<double>(p));
  std::uniform_real_distribution<double> u(-r, r);
  for (auto& w : m.w1) w = u(rng);

  const Matrix x = m.scaler.apply(d.values);
  AdamState state;
  AdamOptions ao;
  ao.lr = opts.lr;
  auto flat = mlp_flat(m);
  for (std::size_t it = 0; it < opts.iters; ++it) {
    const auto g = mlp_loss_gradient(m, x, d.labels).second;
    adam_update(flat, g, state, ao);
    mlp_set_flat(m, flat);
  }
  return m;
}

BaselineModel rf_train(const LabeledDataset& d, const RfOptions& opts) {
  require_both_classes(d);
  BaselineModel m;
  m.kind = BaselineKind::RF;
  m.feature_ids = d.feature_ids;
  m.scaler = Scaler::fit(d.values, ScalingKind::None);
  m.options = Json{{"n_trees", opts.n_trees},
                   {"max_depth", opts.max_depth},
                   {"criterion", opts.criterion == SplitCriterion::Entropy ? "entropy" : "gini"},
                   {"seed", opts.seed}};
  ForestOptions fo;
  fo.n_trees = opts.n_trees;
  fo.max_depth = opts.max_depth;
  fo.criterion = opts.criterion;
  fo.seed = opts.seed;
  m.forest.fit(d.values, d.labels, fo);
  return m;
}

std::vector<double> baseline_predict(const BaselineModel& m, const Matrix& x) {
  check_width(m, x);
  const Matrix xs = m.scaler.apply(x);
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = xs.row(r);
    switch (m.kind) {
      case BaselineKind::LR: {
        double z = m.b;
        for (std::size_t j = 0; j < row.size(); ++j) z += m.w[j] * row[j];
        out[r] = sigmoid(z);
        break;
      }
      case BaselineKind::MLP: out[r] = mlp_forward(m, row); break;
      case BaselineKind::RF: out[r] = m.forest.predict_proba(row); break;
    }
  }
  return out;
}

Json to_json(const BaselineModel& m) {
  Json params;
  switch (m.kind) {
    case BaselineKind::LR: params = Json{{"w", m.w}, {"b", m.b}}; break;
    case BaselineKind::MLP:
      params = Json{{"hidden", m.hidden}, {"w1", m.w1}, {"b1", m.b1}, {"w2", m.w2}, {"b2", m.b2}};
      break;
    case BaselineKind::RF: {
      Json trees = Json::array();
      for (const auto& t : m.forest.trees()) {
        Json nodes = Json::array();
        for (const auto& n : t.nodes()) nodes.push_back(Json::array({n.feature, n.threshold, n.left, n.right, n.vote}));
        trees.push_back(std::move(nodes));
      }
      params = Json{{"trees", std::move(trees)}, {"importances", m.forest.feature_importances()}};
      break;
    }
  }
  return Json{{"format", "omicq-model"},       {"kind", to_string(m.kind)},
              {"config", m.options},           {"feature_ids", m.feature_ids},
              {"scaler", scaler_to_json(m.scaler)}, {"params", std::move(params)}};
}

BaselineModel baseline_model_from_json(const Json& j) {
  BaselineModel m;
  m.kind = baseline_kind_from_string(json_get<std::string>(j, "kind"));
  m.options = j.at("config");
  m.feature_ids = json_get<std::vector<std::string>>(j, "feature_ids");
  m.scaler = scaler_from_json(j.at("scaler"));
  const Json& p = j.at("params");
  const std::size_t nf = m.feature_ids.size();
  switch (m.kind) {
    case BaselineKind::LR:
      m.w = json_get<std::vector<double>>(p, "w");
      m.b = json_get<double>(p, "b");
      if (m.w.size() != nf) throw ValidationError("LR weight count mismatch");
      break;
    case BaselineKind::MLP:
      m.hidden = json_get<std::size_t>(p, "hidden");
      m.w1 = json_get<std::vector<double>>(p, "w1");
      m.b1 = json_get<std::vector<double>>(p, "b1");
      m.w2 = json_get<std::vector<double>>(p, "w2");
      m.b2 = json_get<double>(p, "b2");
      if (m.w1.size() != m.hidden * nf || m.b1.size() != m.hidden || m.w2.size() != m.hidden)
        throw ValidationError("MLP parameter shape mismatch");
      break;
    case BaselineKind::RF: {
      for (const auto& tj : p.at("trees")) {
        DecisionTree t;
        for (const auto& nj : tj) {
          TreeNode n;
          n.feature = nj.at(0).get<int>();
          n.threshold = nj.at(1).get<double>();
          n.left = nj.at(2).get<int>();
          n.right = nj.at(3).get<int>();
          n.vote = nj.at(4).get<int>();
          t.nodes().push_back(n);
        }
        m.forest.trees().push_back(std::move(t));
      }
      m.forest.set_n_features(nf);
      m.forest.set_importances(json_get<std::vector<double>>(p, "importances"));
      break;
    }
  }
  if (m.scaler.shift.size() != nf) throw ValidationError("scaler width mismatch");
  return m;
}

}  // namespace omicq
