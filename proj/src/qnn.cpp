#include "omicq/qnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

QnnConfig QnnConfig::preset(const std::string& name) {
  QnnConfig c;
  if (name == "qnn256") {
    c.n_features = 256;
    c.n_qubits = 8;
    c.dense_width = 256;
  } else if (name == "qnn64") {
    c.n_features = 64;
    c.n_qubits = 6;
    c.dense_width = 64;
  } else if (name == "qnn32") {
    c.n_features = 32;
    c.n_qubits = 5;
    c.dense_width = 32;
  } else {
    throw ValidationError("unknown QNN preset '" + name + "'");
  }
  c.depth = 5;
  return c;
}

void QnnConfig::validate() const {
  if (n_qubits == 0 || n_qubits > 20) throw ValidationError("n_qubits must lie in [1, 20]");
  if ((std::size_t{1} << n_qubits) != n_features)
    throw ValidationError("n_features must equal 2^n_qubits (" + std::to_string(n_features) + " vs " +
                          std::to_string(n_qubits) + " qubits)");
  if (depth < 1) throw ValidationError("depth must be at least 1");
  if (dense_width < 1) throw ValidationError("dense_width must be at least 1");
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test_fraction must lie in (0, 1)");
}

Json to_json(const QnnConfig& c) {
  return Json{{"n_features", c.n_features}, {"n_qubits", c.n_qubits},         {"depth", c.depth},
              {"dense_width", c.dense_width}, {"seed", c.seed},             {"learning_rate", c.learning_rate},
              {"batch_size", c.batch_size},   {"epochs", c.epochs},         {"test_fraction", c.test_fraction},
              {"scaling", to_string(c.scaling)}};
}

QnnConfig qnn_config_from_json(const Json& j, QnnConfig c) {
  if (!j.is_object()) throw ValidationError("QNN config must be an object");
  if (j.contains("preset")) c = QnnConfig::preset(json_get<std::string>(j, "preset"));
  if (j.contains("n_features")) {
    c.n_features = json_get<std::size_t>(j, "n_features");
    std::size_t q = 0;
    while ((std::size_t{1} << q) < c.n_features) ++q;
    c.n_qubits = q;
  }
  if (j.contains("n_qubits")) c.n_qubits = json_get<std::size_t>(j, "n_qubits");
  if (j.contains("depth")) c.depth = json_get<std::size_t>(j, "depth");
  if (j.contains("dense_width")) c.dense_width = json_get<std::size_t>(j, "dense_width");
  if (j.contains("seed")) c.seed = json_get<std::uint64_t>(j, "seed");
  if (j.contains("learning_rate")) c.learning_rate = json_get<double>(j, "learning_rate");
  if (j.contains("batch_size")) c.batch_size = json_get<std::size_t>(j, "batch_size");
  if (j.contains("epochs")) c.epochs = json_get<std::size_t>(j, "epochs");
  if (j.contains("test_fraction")) c.test_fraction = json_get<double>(j, "test_fraction");
  if (j.contains("scaling")) c.scaling = scaling_from_string(json_get<std::string>(j, "scaling"));
  c.validate();
  return c;
}

QnnParams QnnParams::zeros(const QnnConfig& c) {
  QnnParams p;
  p.angles.assign(c.depth * c.n_qubits * 3, 0.0);
  p.w1.assign(c.dense_width * c.n_qubits, 0.0);
  p.b1.assign(c.dense_width, 0.0);
  p.w2.assign(c.dense_width, 0.0);
  return p;
}

QnnParams QnnParams::random(const QnnConfig& c, std::uint64_t seed) {
  QnnParams p = zeros(c);
  Rng rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (auto& a : p.angles) a = angle(rng);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(c.n_qubits));
  std::uniform_real_distribution<double> u1(-r1, r1);
  for (auto& w : p.w1) w = u1(rng);
  const double r2 = 1.0 / std::sqrt(static_cast<double>(c.dense_width));
  std::uniform_real_distribution<double> u2(-r2, r2);
  for (auto& w : p.w2) w = u2(rng);
  return p;
}

RotParams QnnParams::rot(std::size_t layer, std::size_t qubit, std::size_t n_qubits) const {
  const std::size_t base = (layer * n_qubits + qubit) * 3;
  return {angles[base], angles[base + 1], angles[base + 2]};
}

std::vector<double> QnnParams::flat() const {
  std::vector<double> v;
  v.reserve(size());
  v.insert(v.end(), angles.begin(), angles.end());
  v.insert(v.end(), w1.begin(), w1.end());
  v.insert(v.end(), b1.begin(), b1.end());
  v.insert(v.end(), w2.begin(), w2.end());
  v.push_back(b2);
  return v;
}

void QnnParams::set_flat(std::span<const double> v) {
  if (v.size() != size()) throw ValidationError("flat parameter length mismatch");
  auto it = v.begin();
  for (auto* part : {&angles, &w1, &b1, &w2}) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(part->size()), part->begin());
    it += static_cast<std::ptrdiff_t>(part->size());
  }
  b2 = *it;
}

namespace {

void check_shapes(const QnnConfig& c, const QnnParams& p) {
  if (p.angles.size() != c.depth * c.n_qubits * 3 || p.w1.size() != c.dense_width * c.n_qubits ||
      p.b1.size() != c.dense_width || p.w2.size() != c.dense_width)
    throw ValidationError("QNN parameter shapes do not match the config");
}

void check_input(const QnnConfig& c, std::span<const double> x) {
  if (x.size() != c.n_features)
    throw ValidationError("expected " + std::to_string(c.n_features) + " features, got " + std::to_string(x.size()));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void run_layer(const QnnConfig& c, const QnnParams& p, std::size_t l, Statevector& s) {
  for (std::size_t q = 0; q < c.n_qubits; ++q) apply_rot(s, q, p.rot(l, q, c.n_qubits));
  for (std::size_t q = 0; q + 1 < c.n_qubits; ++q) apply_cz(s, q, q + 1);
}

struct HeadPass {
  std::vector<double> pre;
  std::vector<double> hidden;
  double out = 0.0;
  double prob = 0.0;
};

HeadPass head_forward(const QnnConfig& c, const QnnParams& p, const std::vector<double>& z) {
  HeadPass h;
  h.pre.assign(c.dense_width, 0.0);
  h.hidden.assign(c.dense_width, 0.0);
  h.out = p.b2;
  for (std::size_t u = 0; u < c.dense_width; ++u) {
    double a = p.b1[u];
    for (std::size_t q = 0; q < c.n_qubits; ++q) a += p.w1[u * c.n_qubits + q] * z[q];
    h.pre[u] = a;
    h.hidden[u] = a > 0.0 ? a : 0.0;
    h.out += p.w2[u] * h.hidden[u];
  }
  h.prob = sigmoid(h.out);
  return h;
}

}  // namespace

std::vector<double> circuit_readout(const QnnConfig& c, const QnnParams& p, std::span<const double> x) {
  check_input(c, x);
  check_shapes(c, p);
  Statevector s = amplitude_encode(x);
  for (std::size_t l = 0; l < c.depth; ++l) run_layer(c, p, l, s);
  return expval_z_all(s);
}

double forward(const QnnConfig& c, const QnnParams& p, std::span<const double> x) {
  return head_forward(c, p, circuit_readout(c, p, x)).prob;
}

double bce_loss(std::span<const double> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) throw ValidationError("BCE: length mismatch");
  if (preds.empty()) throw ValidationError("BCE: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = std::clamp(preds[i], kProbClamp, 1.0 - kProbClamp);
    sum -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return sum / static_cast<double>(preds.size());
}

QnnParams gradients(const QnnConfig& c, const QnnParams& p, const Matrix& x, std::span<const int> y) {
  check_shapes(c, p);
  if (x.rows() == 0) throw ValidationError("gradient of an empty batch");
  if (x.rows() != y.size()) throw ValidationError("gradient: label count mismatch");
  QnnParams g = QnnParams::zeros(c);
  const double inv_b = 1.0 / static_cast<double>(x.rows());
  const std::size_t nq = c.n_qubits;

  std::vector<Statevector> layer_in(c.depth);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    check_input(c, row);
    Statevector s = amplitude_encode(row);
    for (std::size_t l = 0; l < c.depth; ++l) {
      layer_in[l] = s;
      run_layer(c, p, l, s);
    }
    const auto z = expval_z_all(s);
    const HeadPass h = head_forward(c, p, z);
    if (h.prob < kProbClamp || h.prob > 1.0 - kProbClamp) continue;
    const double g_out = (h.prob - static_cast<double>(y[r])) * inv_b;

    g.b2 += g_out;
    std::vector<double> g_z(nq, 0.0);
    for (std::size_t u = 0; u < c.dense_width; ++u) {
      g.w2[u] += g_out * h.hidden[u];
      if (h.pre[u] <= 0.0) continue;
      const double g_pre = g_out * p.w2[u];
      g.b1[u] += g_pre;
      for (std::size_t q = 0; q < nq; ++q) {
        g.w1[u * nq + q] += g_pre * z[q];
        g_z[q] += g_pre * p.w1[u * nq + q];
      }
    }

    // Parameter shift: d<Z>/da = (f(a + pi/2) - f(a - pi/2)) / 2 for each angle.
    for (std::size_t l = 0; l < c.depth; ++l) {
      Statevector partial = layer_in[l];  // rotations on qubits < q already applied
      for (std::size_t q = 0; q < nq; ++q) {
        const RotParams base = p.rot(l, q, nq);
        for (std::size_t a = 0; a < 3; ++a) {
          double diff = 0.0;
          for (int sign : {1, -1}) {
            RotParams shifted = base;
            double* angle = a == 0 ? &shifted.theta : a == 1 ? &shifted.phi : &shifted.lambda;
            *angle += sign * std::numbers::pi / 2.0;
            Statevector t = partial;
            apply_rot(t, q, shifted);
            for (std::size_t k = q + 1; k < nq; ++k) apply_rot(t, k, p.rot(l, k, nq));
            for (std::size_t k = 0; k + 1 < nq; ++k) apply_cz(t, k, k + 1);
            for (std::size_t m = l + 1; m < c.depth; ++m) run_layer(c, p, m, t);
            const auto zs = expval_z_all(t);
            double dot = 0.0;
            for (std::size_t k = 0; k < nq; ++k) dot += g_z[k] * zs[k];
            diff += sign * dot;
          }
          g.angles[(l * nq + q) * 3 + a] += diff / 2.0;
        }
        apply_rot(partial, q, base);
      }
    }
  }
  return g;
}

void adam_step(QnnParams& p, const QnnParams& grads, AdamState& state, const AdamOptions& opts) {
  auto flat = p.flat();
  const auto g = grads.flat();
  adam_update(flat, g, state, opts);
  p.set_flat(flat);
}

std::string format_history(const TrainHistory& h) {
  std::string out = "epoch\ttrain_loss\ttrain_accuracy\tval_loss\tval_accuracy\n";
  for (std::size_t e = 0; e < h.epochs.size(); ++e) {
    const auto& r = h.epochs[e];
    out += std::to_string(e + 1) + "\t" + format_double(r.train_loss) + "\t" + format_double(r.train_accuracy) +
           "\t" + format_double(r.val_loss) + "\t" + format_double(r.val_accuracy) + "\n";
  }
  return out;
}

namespace {

std::vector<double> proba_scaled(const QnnConfig& c, const QnnParams& p, const Matrix& xs) {
  std::vector<double> out(xs.rows());
  for (std::size_t r = 0; r < xs.rows(); ++r) out[r] = forward(c, p, xs.row(r));
  return out;
}

std::pair<double, double> loss_and_accuracy(const std::vector<double>& probs, std::span<const int> y) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) correct += (probs[i] >= 0.5 ? 1 : 0) == y[i];
  return {bce_loss(probs, y), static_cast<double>(correct) / static_cast<double>(probs.size())};
}

}  // namespace

std::vector<double> predict_proba(const QnnModel& m, const Matrix& x) {
  if (x.cols() != m.config.n_features)
    throw ValidationError("expected " + std::to_string(m.config.n_features) + " feature columns, got " +
                          std::to_string(x.cols()));
  return proba_scaled(m.config, m.params, m.scaler.apply(x));
}

std::vector<int> predict_labels(const QnnModel& m, const Matrix& x, double threshold) {
  const auto probs = predict_proba(m, x);
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
  return out;
}

QnnTrainResult train(const QnnConfig& c, const LabeledDataset& d) {
  c.validate();
  d.validate();
  if (d.n_features() != c.n_features)
    throw ValidationError("dataset has " + std::to_string(d.n_features()) + " features, model expects " +
                          std::to_string(c.n_features));
  QnnTrainResult res;
  res.split = stratified_split(d.labels, c.test_fraction, c.seed);
  const Matrix x_train_raw = d.values.select_rows(res.split.train);
  const Matrix x_test_raw = d.values.select_rows(res.split.test);
  std::vector<int> y_train, y_test;
  for (auto i : res.split.train) y_train.push_back(d.labels[i]);
  for (auto i : res.split.test) y_test.push_back(d.labels[i]);

  QnnModel& model = res.model;
  model.config = c;
  model.feature_ids = d.feature_ids;
  model.scaler = Scaler::fit(x_train_raw, c.scaling);
  model.params = QnnParams::random(c, derive_seed(c.seed, "qnn-init"));
  if (c.epochs == 0) return res;

  const Matrix x_train = model.scaler.apply(x_train_raw);
  const Matrix x_test = model.scaler.apply(x_test_raw);

  QnnParams params = model.params;
  AdamState state;
  AdamOptions opts;
  opts.lr = c.learning_rate;
  Rng rng(derive_seed(c.seed, "qnn-batches"));
  std::vector<std::size_t> order(x_train.rows());
  std::iota(order.begin(), order.end(), 0);
  double best_val = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < c.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += c.batch_size) {
      const std::size_t end = std::min(order.size(), start + c.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = x_train.select_rows(idx);
      std::vector<int> yb;
      for (auto i : idx) yb.push_back(y_train[i]);
      adam_step(params, gradients(c, params, xb, yb), state, opts);
    }
    EpochRecord rec;
    std::tie(rec.train_loss, rec.train_accuracy) = loss_and_accuracy(proba_scaled(c, params, x_train), y_train);
    std::tie(rec.val_loss, rec.val_accuracy) = loss_and_accuracy(proba_scaled(c, params, x_test), y_test);
    res.history.epochs.push_back(rec);
    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      model.params = params;
    }
  }
  return res;
}

Json to_json(const QnnModel& m) {
  return Json{{"format", "omicq-model"},
              {"kind", "qnn"},
              {"config", to_json(m.config)},
              {"feature_ids", m.feature_ids},
              {"scaler", scaler_to_json(m.scaler)},
              {"params",
               {{"angles", m.params.angles}, {"w1", m.params.w1}, {"b1", m.params.b1}, {"w2", m.params.w2},
                {"b2", m.params.b2}}}};
}

QnnModel qnn_model_from_json(const Json& j) {
  if (json_get<std::string>(j, "kind") != "qnn") throw ValidationError("checkpoint is not a QNN model");
  QnnModel m;
  m.config = qnn_config_from_json(j.at("config"));
  m.feature_ids = json_get<std::vector<std::string>>(j, "feature_ids");
  m.scaler = scaler_from_json(j.at("scaler"));
  const Json& p = j.at("params");
  m.params.angles = json_get<std::vector<double>>(p, "angles");
  m.params.w1 = json_get<std::vector<double>>(p, "w1");
  m.params.b1 = json_get<std::vector<double>>(p, "b1");
  m.params.w2 = json_get<std::vector<double>>(p, "w2");
  m.params.b2 = json_get<double>(p, "b2");
  check_shapes(m.config, m.params);
  if (m.feature_ids.size() != m.config.n_features || m.scaler.shift.size() != m.config.n_features)
    throw ValidationError("checkpoint feature count does not match its config");
  return m;
}

}  // namespace omicq
