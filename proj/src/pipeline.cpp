#include "omicq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "omicq/errors.hpp"
#include "omicq/metrics.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

namespace {

const std::vector<ScoreMethod> kMethods{ScoreMethod::MI, ScoreMethod::Chi2, ScoreMethod::PCA, ScoreMethod::RF};

ScoreMethod score_method_from_string(const std::string& s) {
  for (auto m : kMethods)
    if (to_string(m) == s) return m;
  throw ValidationError("unknown selection method '" + s + "'");
}

std::string criterion_name(SplitCriterion c) { return c == SplitCriterion::Entropy ? "entropy" : "gini"; }

SplitCriterion split_criterion_from_string(const std::string& s) {
  if (s == "entropy") return SplitCriterion::Entropy;
  if (s == "gini") return SplitCriterion::Gini;
  throw ValidationError("unknown split criterion '" + s + "'");
}

std::string to_string(TMode m) { return m == TMode::Paper ? "paper" : "welch"; }
std::string to_string(CutCriterion c) { return c == CutCriterion::MaxClust ? "maxclust" : "distance"; }
std::string to_string(ImportanceMode m) { return m == ImportanceMode::Dense ? "dense" : "gradient"; }

void check_keys(const Json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError(std::string("unknown key '") + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = json_get<T>(j, key);
}

OmicPlan default_plan(OmicKind kind) {
  OmicPlan p;
  p.kind = kind;
  if (kind == OmicKind::miRNAseq) {
    p.scheme = {{0.0, 0.05, 300}, {0.05, 1.0, 300}};
  } else {
    p.scheme = {{0.0, 1e-3, 300}, {1e-3, 0.05, 300}, {0.05, 1.0, 300}};
  }
  return p;
}

SyntheticOmicSpec default_synth_omic(OmicKind kind) {
  SyntheticOmicSpec o;
  o.kind = kind;
  o.n_features = 1000;
  o.effects = {{40, 8.0}, {40, 5.0}, {40, 2.5}};
  o.base_mean = 10.0;
  o.missing_fraction = 0.02;
  o.unit = kind == OmicKind::DNAme ? "beta" : kind == OmicKind::RNAseq ? "log2(count+1)" : "log2(RPM+1)";
  return o;
}

Json config_to_json(const PipelineConfig& c) {
  Json synth_omics = Json::array();
  for (const auto& o : c.synth.omics) {
    Json effects = Json::array();
    for (const auto& g : o.effects) effects.push_back({{"count", g.count}, {"effect", g.effect}});
    synth_omics.push_back({{"kind", std::string(to_string(o.kind))},
                           {"n_features", o.n_features},
                           {"effects", effects},
                           {"base_mean", o.base_mean},
                           {"noise_sd", o.noise_sd},
                           {"missing_fraction", o.missing_fraction},
                           {"unit", o.unit},
                           {"decimals", o.decimals}});
  }
  Json inputs_omics = Json::object();
  for (const auto& [kind, paths] : c.input_omics) {
    Json list = Json::array();
    for (const auto& p : paths) list.push_back(p.string());
    inputs_omics[std::string(to_string(kind))] = list;
  }
  Json plans = Json::array();
  for (const auto& p : c.omics) {
    Json scheme = Json::array();
    for (const auto& r : p.scheme) scheme.push_back({{"low", r.low}, {"high", r.high}, {"max_count", r.max_count}});
    plans.push_back({{"kind", std::string(to_string(p.kind))},
                     {"scheme", scheme},
                     {"targets", p.targets},
                     {"final_count", p.final_count}});
  }
  Json k_best = Json::object();
  for (const auto& [m, k] : c.k_best) k_best[to_string(m)] = k;
  Json cluster{{"criterion", to_string(c.cluster_criterion)},
               {"distance_threshold", c.distance_threshold},
               {"k_per_cluster", c.k_per_cluster}};
  cluster["maxclust"] = c.maxclust ? Json(*c.maxclust) : Json(nullptr);
  Json qnn{{"depth", c.qnn.depth},
           {"learning_rate", c.qnn.learning_rate},
           {"batch_size", c.qnn.batch_size},
           {"epochs", c.qnn.epochs},
           {"test_fraction", c.qnn.test_fraction},
           {"scaling", to_string(c.qnn.scaling)}};
  qnn["dense_width"] = c.qnn_dense_width ? Json(*c.qnn_dense_width) : Json(nullptr);
  return Json{
      {"seed", c.seed},
      {"synth", {{"n_lusc", c.synth.n_lusc}, {"n_luad", c.synth.n_luad}, {"omics", synth_omics}}},
      {"inputs", {{"omics", inputs_omics}, {"clinical", c.input_clinical.string()}, {"impute_missing", c.impute_missing}}},
      {"engineer", {{"t_mode", to_string(c.t_mode)}, {"alpha", c.alpha}}},
      {"omics", plans},
      {"select",
       {{"bins", c.bins},
        {"k_best", k_best},
        {"pca_components", c.pca_components},
        {"rf_trees", c.rf_trees},
        {"rf_max_depth", c.rf_max_depth},
        {"auc_threshold", c.auc_threshold},
        {"auc_trees", c.auc_trees},
        {"auc_max_depth", c.auc_max_depth},
        {"test_fraction", c.test_fraction},
        {"cluster", cluster}}},
      {"integrate", {{"widths", c.widths}}},
      {"train",
       {{"model", c.model},
        {"qnn", qnn},
        {"lr", {{"C", c.lr.C}, {"iters", c.lr.iters}, {"lr", c.lr.lr}, {"tol", c.lr.tol}, {"scaling", to_string(c.lr.scaling)}}},
        {"mlp", {{"hidden", c.mlp.hidden}, {"iters", c.mlp.iters}, {"lr", c.mlp.lr}, {"scaling", to_string(c.mlp.scaling)}}},
        {"rf", {{"n_trees", c.rf.n_trees}, {"max_depth", c.rf.max_depth}, {"criterion", criterion_name(c.rf.criterion)}}},
        {"baseline_width", c.baseline_width}}},
      {"report",
       {{"top_n", c.top_n},
        {"deviation_top_n", c.deviation_top_n},
        {"importance_mode", to_string(c.importance_mode)},
        {"name_map", c.name_map.string()}}}};
}

}  // namespace

void set_seed(PipelineConfig& c, std::uint64_t seed) {
  c.seed = seed;
  c.qnn.seed = seed;
  c.mlp.seed = seed;
  c.rf.seed = seed;
  c.snapshot = config_to_json(c);
}

PipelineConfig default_config() {
  PipelineConfig c;
  c.synth.n_lusc = 200;
  c.synth.n_luad = 200;
  for (auto k : {OmicKind::DNAme, OmicKind::RNAseq, OmicKind::miRNAseq}) {
    c.synth.omics.push_back(default_synth_omic(k));
    c.omics.push_back(default_plan(k));
  }
  for (auto m : kMethods) c.k_best[m] = 100;
  set_seed(c, 42);
  return c;
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c = default_config();
  check_keys(j, "config", {"seed", "synth", "inputs", "engineer", "omics", "select", "integrate", "train", "report"});
  try {
    read_opt(j, "seed", c.seed);

    if (j.contains("synth")) {
      const Json& s = j.at("synth");
      check_keys(s, "synth", {"n_lusc", "n_luad", "omics"});
      read_opt(s, "n_lusc", c.synth.n_lusc);
      read_opt(s, "n_luad", c.synth.n_luad);
      if (s.contains("omics")) {
        c.synth.omics.clear();
        for (const Json& o : s.at("omics")) {
          check_keys(o, "synth.omics[]",
                     {"kind", "n_features", "effects", "base_mean", "noise_sd", "missing_fraction", "unit", "decimals"});
          SyntheticOmicSpec spec = default_synth_omic(omic_kind_from_string(json_get<std::string>(o, "kind")));
          read_opt(o, "n_features", spec.n_features);
          read_opt(o, "base_mean", spec.base_mean);
          read_opt(o, "noise_sd", spec.noise_sd);
          read_opt(o, "missing_fraction", spec.missing_fraction);
          read_opt(o, "unit", spec.unit);
          read_opt(o, "decimals", spec.decimals);
          if (o.contains("effects")) {
            spec.effects.clear();
            for (const Json& g : o.at("effects"))
              spec.effects.push_back({json_get<std::size_t>(g, "count"), json_get<double>(g, "effect")});
          }
          c.synth.omics.push_back(std::move(spec));
        }
      }
    }

    if (j.contains("inputs")) {
      const Json& in = j.at("inputs");
      check_keys(in, "inputs", {"omics", "clinical", "impute_missing"});
      if (in.contains("omics"))
        for (const auto& [kind, paths] : in.at("omics").items()) {
          auto& list = c.input_omics[omic_kind_from_string(kind)];
          for (const auto& p : paths) list.emplace_back(p.get<std::string>());
        }
      if (in.contains("clinical")) c.input_clinical = json_get<std::string>(in, "clinical");
      read_opt(in, "impute_missing", c.impute_missing);
    }

    if (j.contains("engineer")) {
      const Json& e = j.at("engineer");
      check_keys(e, "engineer", {"t_mode", "alpha"});
      if (e.contains("t_mode")) c.t_mode = t_mode_from_string(json_get<std::string>(e, "t_mode"));
      read_opt(e, "alpha", c.alpha);
    }

    if (j.contains("omics")) {
      c.omics.clear();
      for (const Json& o : j.at("omics")) {
        check_keys(o, "omics[]", {"kind", "scheme", "targets", "final_count"});
        OmicPlan p = default_plan(omic_kind_from_string(json_get<std::string>(o, "kind")));
        if (o.contains("scheme")) {
          p.scheme.clear();
          for (const Json& r : o.at("scheme")) {
            check_keys(r, "scheme[]", {"low", "high", "max_count"});
            PValueRange range;
            range.low = json_get<double>(r, "low");
            range.high = json_get<double>(r, "high");
            read_opt(r, "max_count", range.max_count);
            p.scheme.push_back(range);
          }
        }
        read_opt(o, "targets", p.targets);
        read_opt(o, "final_count", p.final_count);
        c.omics.push_back(std::move(p));
      }
    }

    if (j.contains("select")) {
      const Json& s = j.at("select");
      check_keys(s, "select",
                 {"bins", "k_best", "pca_components", "rf_trees", "rf_max_depth", "auc_threshold", "auc_trees",
                  "auc_max_depth", "test_fraction", "cluster"});
      read_opt(s, "bins", c.bins);
      if (s.contains("k_best")) {
        const Json& k = s.at("k_best");
        if (k.is_number_integer()) {
          if (k.get<long long>() < 0) throw ValidationError("k_best must be non-negative");
          for (auto m : kMethods) c.k_best[m] = k.get<std::size_t>();
        } else {
          if (!k.is_object()) throw ValidationError("k_best must be a number or an object keyed by method");
          for (const auto& [name, v] : k.items()) c.k_best[score_method_from_string(name)] = v.get<std::size_t>();
        }
      }
      read_opt(s, "pca_components", c.pca_components);
      read_opt(s, "rf_trees", c.rf_trees);
      read_opt(s, "rf_max_depth", c.rf_max_depth);
      read_opt(s, "auc_threshold", c.auc_threshold);
      read_opt(s, "auc_trees", c.auc_trees);
      read_opt(s, "auc_max_depth", c.auc_max_depth);
      read_opt(s, "test_fraction", c.test_fraction);
      if (s.contains("cluster")) {
        const Json& cl = s.at("cluster");
        check_keys(cl, "select.cluster", {"criterion", "distance_threshold", "maxclust", "k_per_cluster"});
        if (cl.contains("criterion")) c.cluster_criterion = cut_criterion_from_string(json_get<std::string>(cl, "criterion"));
        read_opt(cl, "distance_threshold", c.distance_threshold);
        if (cl.contains("maxclust") && !cl.at("maxclust").is_null()) c.maxclust = json_get<std::size_t>(cl, "maxclust");
        read_opt(cl, "k_per_cluster", c.k_per_cluster);
      }
    }

    if (j.contains("integrate")) {
      check_keys(j.at("integrate"), "integrate", {"widths"});
      read_opt(j.at("integrate"), "widths", c.widths);
    }

    if (j.contains("train")) {
      const Json& t = j.at("train");
      check_keys(t, "train", {"model", "qnn", "lr", "mlp", "rf", "baseline_width"});
      read_opt(t, "model", c.model);
      if (t.contains("qnn")) {
        const Json& q = t.at("qnn");
        check_keys(q, "train.qnn", {"depth", "learning_rate", "batch_size", "epochs", "test_fraction", "scaling", "dense_width"});
        read_opt(q, "depth", c.qnn.depth);
        read_opt(q, "learning_rate", c.qnn.learning_rate);
        read_opt(q, "batch_size", c.qnn.batch_size);
        read_opt(q, "epochs", c.qnn.epochs);
        read_opt(q, "test_fraction", c.qnn.test_fraction);
        if (q.contains("scaling")) c.qnn.scaling = scaling_from_string(json_get<std::string>(q, "scaling"));
        if (q.contains("dense_width") && !q.at("dense_width").is_null())
          c.qnn_dense_width = json_get<std::size_t>(q, "dense_width");
      }
      if (t.contains("lr")) {
        const Json& l = t.at("lr");
        check_keys(l, "train.lr", {"C", "iters", "lr", "tol", "scaling"});
        read_opt(l, "C", c.lr.C);
        read_opt(l, "iters", c.lr.iters);
        read_opt(l, "lr", c.lr.lr);
        read_opt(l, "tol", c.lr.tol);
        if (l.contains("scaling")) c.lr.scaling = scaling_from_string(json_get<std::string>(l, "scaling"));
      }
      if (t.contains("mlp")) {
        const Json& m = t.at("mlp");
        check_keys(m, "train.mlp", {"hidden", "iters", "lr", "scaling"});
        read_opt(m, "hidden", c.mlp.hidden);
        read_opt(m, "iters", c.mlp.iters);
        read_opt(m, "lr", c.mlp.lr);
        if (m.contains("scaling")) c.mlp.scaling = scaling_from_string(json_get<std::string>(m, "scaling"));
      }
      if (t.contains("rf")) {
        const Json& r = t.at("rf");
        check_keys(r, "train.rf", {"n_trees", "max_depth", "criterion"});
        read_opt(r, "n_trees", c.rf.n_trees);
        read_opt(r, "max_depth", c.rf.max_depth);
        if (r.contains("criterion")) c.rf.criterion = split_criterion_from_string(json_get<std::string>(r, "criterion"));
      }
      read_opt(t, "baseline_width", c.baseline_width);
    }

    if (j.contains("report")) {
      const Json& r = j.at("report");
      check_keys(r, "report", {"top_n", "deviation_top_n", "importance_mode", "name_map"});
      read_opt(r, "top_n", c.top_n);
      read_opt(r, "deviation_top_n", c.deviation_top_n);
      if (r.contains("importance_mode"))
        c.importance_mode = importance_mode_from_string(json_get<std::string>(r, "importance_mode"));
      if (r.contains("name_map")) c.name_map = json_get<std::string>(r, "name_map");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }

  if (!is_model_name(c.model)) throw ValidationError("unknown model '" + c.model + "'");
  for (const auto& p : c.omics)
    if (!p.targets.empty() && p.targets.size() != p.scheme.size())
      throw ValidationError("omic " + std::string(to_string(p.kind)) + ": one target per p-value range required");
  if (c.widths.empty()) throw ValidationError("integrate.widths must not be empty");
  set_seed(c, c.seed);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  const Json j = read_json_file(path);
  try {
    return config_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

bool is_model_name(const std::string& name) {
  return name == "qnn256" || name == "qnn64" || name == "qnn32" || name == "lr" || name == "mlp" || name == "rf";
}

QnnConfig qnn_config_for(const PipelineConfig& c, const std::string& model) {
  QnnConfig q = QnnConfig::preset(model);
  q.depth = c.qnn.depth;
  q.seed = c.seed;
  q.learning_rate = c.qnn.learning_rate;
  q.batch_size = c.qnn.batch_size;
  q.epochs = c.qnn.epochs;
  q.test_fraction = c.qnn.test_fraction;
  q.scaling = c.qnn.scaling;
  if (c.qnn_dense_width) q.dense_width = *c.qnn_dense_width;
  q.validate();
  return q;
}

std::size_t model_width(const PipelineConfig& c, const std::string& model) {
  if (model.rfind("qnn", 0) == 0) return QnnConfig::preset(model).n_features;
  if (!is_model_name(model)) throw ValidationError("unknown model '" + model + "'");
  return c.baseline_width;
}

namespace {

// Records content hashes of everything a stage reads and writes. Paths under
// the output root are stored relative to it so that runs in different
// directories produce identical manifests.
class Manifest {
 public:
  Manifest(const PipelineConfig& c, fs::path root, std::string stage)
      : config_(c), root_(std::move(root)), stage_(std::move(stage)) {}

  std::string read(const fs::path& p) {
    const fs::path full = p.is_absolute() ? p : root_ / p;
    std::string text = read_text_file(full);
    inputs_[key(p)] = hex64(fnv1a64(text));
    return text;
  }

  void read_external(const fs::path& p, std::string_view text) { inputs_[p.string()] = hex64(fnv1a64(text)); }

  void write(const fs::path& rel, std::string_view content) {
    write_text_file(root_ / rel, content);
    outputs_[rel.generic_string()] = hex64(fnv1a64(content));
  }

  void set(const std::string& key, Json value) { extra_[key] = std::move(value); }

  void finish() {
    Json j{{"stage", stage_}, {"seed", config_.seed}, {"config", config_.snapshot},
           {"inputs", inputs_}, {"outputs", outputs_}};
    if (!extra_.empty()) j["summary"] = extra_;
    write_text_file(root_ / stage_ / "manifest.json", j.dump(2) + "\n");
  }

 private:
  std::string key(const fs::path& p) const { return p.is_absolute() ? p.string() : p.generic_string(); }

  const PipelineConfig& config_;
  fs::path root_;
  std::string stage_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
  Json extra_ = Json::object();
};

std::string kind_name(OmicKind k) { return std::string(to_string(k)); }

LabeledDataset read_dataset(Manifest& m, const fs::path& stem, std::optional<OmicKind> kind) {
  const fs::path mp = stem.string() + ".matrix.tsv";
  const fs::path lp = stem.string() + ".labels.tsv";
  const std::string mt = m.read(mp);
  const std::string lt = m.read(lp);
  try {
    return parse_labeled_dataset_text(mt, lt, kind, stem.string());
  } catch (const ValidationError& e) {
    throw ValidationError(stem.string() + ": " + e.what());
  }
}

void write_dataset(Manifest& m, const fs::path& stem, const LabeledDataset& d) {
  m.write(stem.string() + ".matrix.tsv", format_dataset_matrix(d));
  m.write(stem.string() + ".labels.tsv", format_labels(d));
}

std::string format_id_list(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += id + "\n";
  return out;
}

std::vector<std::string> parse_id_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.emplace_back(line);
    start = end + 1;
  }
  return out;
}

std::string subset_name(std::size_t i) { return "S" + std::to_string(i + 1); }

OmicsMatrix rows_with_label(const OmicsMatrix& m, const std::map<std::string, int>& labels, int label) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < m.sample_ids.size(); ++i)
    if (labels.at(m.sample_ids[i]) == label) rows.push_back(i);
  OmicsMatrix out;
  out.omic_kind = m.omic_kind;
  out.unit = m.unit;
  out.feature_ids = m.feature_ids;
  for (auto r : rows) out.sample_ids.push_back(m.sample_ids[r]);
  out.values = m.values.select_rows(rows);
  return out;
}

Matrix zscore_columns(const Matrix& x) {
  Matrix z = x;
  const std::size_t n = x.rows();
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += x(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (x(r, c) - mean) * (x(r, c) - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    for (std::size_t r = 0; r < n; ++r) z(r, c) = sd > 0.0 ? (x(r, c) - mean) / sd : 0.0;
  }
  return z;
}

std::vector<std::size_t> quotas(const std::vector<std::size_t>& sizes, std::size_t width) {
  std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> q(sizes.size(), 0);
  if (width >= total) return sizes;
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const double exact = static_cast<double>(sizes[k]) * static_cast<double>(width) / static_cast<double>(total);
    q[k] = static_cast<std::size_t>(std::floor(exact));
    used += q[k];
    rem.emplace_back(exact - static_cast<double>(q[k]), k);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < width; ++i, ++used) ++q[rem[i % rem.size()].second];
  return q;
}

fs::path dataset_stem(std::size_t width) { return fs::path("integrate") / ("multiomic_" + std::to_string(width)); }

std::string format_split(const LabeledDataset& d, const TrainTestSplit& s) {
  std::vector<std::string> part(d.n_samples());
  for (auto i : s.train) part[i] = "train";
  for (auto i : s.test) part[i] = "test";
  std::string out = "sample_id\tpartition\n";
  for (std::size_t i = 0; i < d.n_samples(); ++i) out += d.sample_ids[i] + "\t" + part[i] + "\n";
  return out;
}

TrainTestSplit parse_split(std::string_view text, const LabeledDataset& d) {
  std::map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < d.n_samples(); ++i) row[d.sample_ids[i]] = i;
  TrainTestSplit s;
  const auto lines = parse_id_list(text);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_tabs(lines[i]);
    if (cells.size() != 2) throw ValidationError("malformed split row " + std::to_string(i + 1));
    const auto it = row.find(cells[0]);
    if (it == row.end()) throw ValidationError("split names unknown sample '" + cells[0] + "'");
    if (cells[1] == "train") {
      s.train.push_back(it->second);
    } else if (cells[1] == "test") {
      s.test.push_back(it->second);
    } else {
      throw ValidationError("unknown partition '" + cells[1] + "'");
    }
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  if (s.train.empty() || s.test.empty()) throw ValidationError("split needs both partitions");
  return s;
}

// A trained model of either family behind one prediction call.
struct AnyModel {
  std::optional<QnnModel> qnn;
  std::optional<BaselineModel> baseline;

  std::vector<double> predict(const Matrix& x) const {
    return qnn ? predict_proba(*qnn, x) : baseline_predict(*baseline, x);
  }
  const std::vector<std::string>& feature_ids() const { return qnn ? qnn->feature_ids : baseline->feature_ids; }
};

AnyModel parse_model(const std::string& text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(source + ": " + e.what());
  }
  AnyModel m;
  try {
    if (json_get<std::string>(j, "kind") == "qnn") {
      m.qnn = qnn_model_from_json(j);
    } else {
      m.baseline = baseline_model_from_json(j);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return m;
}

fs::path model_dir(const std::string& stage, const std::string& model) { return fs::path(stage) / model; }

Json scores_json(const ConfusionMatrix& cm) {
  auto one = [](const ClassificationScores& s) {
    return Json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
                {"precision_undefined", s.precision_undefined}, {"recall_undefined", s.recall_undefined},
                {"f1_undefined", s.f1_undefined}};
  };
  return Json{{"LUAD", one(classification_scores(cm))}, {"LUSC", one(classification_scores(swap_positive_class(cm)))}};
}

Json partition_metrics(std::span<const int> y, const std::vector<double>& probs) {
  std::vector<int> preds(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) preds[i] = probs[i] >= 0.5 ? 1 : 0;
  const ConfusionMatrix cm = confusion(y, preds);
  Json j{{"n", y.size()},
         {"accuracy", classification_scores(cm).accuracy},
         {"loss", bce_loss(probs, y)},
         {"confusion", {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}}},
         {"per_class", scores_json(cm)}};
  bool both = std::find(y.begin(), y.end(), 0) != y.end() && std::find(y.begin(), y.end(), 1) != y.end();
  j["auc"] = both ? Json(roc_auc(y, probs)) : Json(nullptr);
  return j;
}

std::vector<int> gather(const std::vector<int>& v, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace

void cmd_synth(const PipelineConfig& c, const fs::path& out) {
  const SyntheticCohort cohort = generate_synthetic_cohort(c.synth, c.seed);
  Manifest m(c, out, "synth");
  std::map<std::string, int> labels;
  for (const auto& r : cohort.clinical.records) labels[r.sample_id] = label_of(r.subtype);
  std::string truth = "omic\tfeature_id\teffect\n";
  for (std::size_t k = 0; k < cohort.omics.size(); ++k) {
    const auto& om = cohort.omics[k];
    const std::string name = kind_name(om.omic_kind);
    m.write(fs::path("synth") / (name + "_LUSC.tsv"), format_omic_matrix(rows_with_label(om, labels, 0)));
    m.write(fs::path("synth") / (name + "_LUAD.tsv"), format_omic_matrix(rows_with_label(om, labels, 1)));
    for (const auto& [id, effect] : cohort.informative[k]) truth += name + "\t" + id + "\t" + format_double(effect) + "\n";
  }
  m.write("synth/clinical.tsv", format_clinical(cohort.clinical));
  m.write("synth/truth.tsv", truth);
  m.finish();
}

void cmd_ingest(const PipelineConfig& c, const fs::path& out) {
  Manifest m(c, out, "ingest");
  const bool external = !c.input_omics.empty();
  const fs::path clinical_path = external ? c.input_clinical : fs::path("synth/clinical.tsv");
  if (clinical_path.empty()) throw ValidationError("inputs.clinical is required when omic inputs are given");
  const ClinicalTable clinical = [&] {
    const std::string text = m.read(clinical_path);
    try {
      return parse_clinical_text(text);
    } catch (const ValidationError& e) {
      throw ValidationError(clinical_path.string() + ": " + e.what());
    }
  }();

  ParseOptions opts;
  opts.impute_mean = c.impute_missing;
  Json summary = Json::object();
  for (const auto& plan : c.omics) {
    const std::string name = kind_name(plan.kind);
    std::vector<fs::path> files;
    if (external) {
      const auto it = c.input_omics.find(plan.kind);
      if (it == c.input_omics.end() || it->second.empty()) throw ValidationError("no input files for omic " + name);
      files = it->second;
    } else {
      files = {fs::path("synth") / (name + "_LUSC.tsv"), fs::path("synth") / (name + "_LUAD.tsv")};
    }
    std::optional<OmicsMatrix> merged;
    for (const auto& f : files) {
      const std::string text = m.read(f);
      OmicsMatrix part;
      try {
        part = parse_omic_matrix_text(text, plan.kind, opts);
      } catch (const ValidationError& e) {
        throw ValidationError(f.string() + ": " + e.what());
      }
      merged = merged ? concat_cohorts(*merged, part) : std::move(part);
    }
    const std::size_t before = merged->feature_ids.size();
    const OmicsMatrix kept = drop_nonpositive_features(*merged);
    LabeledDataset d = join_clinical(kept, clinical);
    d.omic_kind = plan.kind;
    write_dataset(m, fs::path("ingest") / name, d);
    summary[name] = {{"samples", d.n_samples()}, {"features", d.n_features()}, {"dropped_nonpositive", before - kept.feature_ids.size()}};
  }
  m.set("omics", summary);
  m.finish();
}

void cmd_engineer(const PipelineConfig& c, const fs::path& out) {
  Manifest m(c, out, "engineer");
  Json summary = Json::object();
  for (const auto& plan : c.omics) {
    const std::string name = kind_name(plan.kind);
    const LabeledDataset d = read_dataset(m, fs::path("ingest") / name, plan.kind);
    const auto stats = t_statistic(d, c.t_mode);
    m.write(fs::path("engineer") / (name + ".stats.tsv"), format_feature_stats(stats));
    const auto subsets = split_by_pvalue(stats, plan.scheme);
    Json counts = Json::array();
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      m.write(fs::path("engineer") / (name + "." + subset_name(i) + ".txt"), format_id_list(subsets[i]));
      counts.push_back(subsets[i].size());
    }
    std::size_t below = 0;
    for (const auto& s : stats) below += s.p_value < c.alpha;
    summary[name] = {{"features", stats.size()}, {"below_alpha", below}, {"subset_sizes", counts}};
  }
  m.set("omics", summary);
  m.finish();
}

void cmd_select(const PipelineConfig& c, const fs::path& out) {
  Manifest m(c, out, "select");
  Json summary = Json::object();
  std::size_t grand_total = 0;
  for (const auto& plan : c.omics) {
    const std::string name = kind_name(plan.kind);
    const fs::path dir("select");
    const LabeledDataset d = read_dataset(m, fs::path("ingest") / name, plan.kind);
    const TrainTestSplit split = stratified_split(d.labels, c.test_fraction, c.seed);

    std::vector<std::pair<std::string, double>> pooled;  // (id, test AUC)
    Json omic_summary = Json::array();
    for (std::size_t si = 0; si < plan.scheme.size(); ++si) {
      const std::string tag = name + "." + subset_name(si);
      const std::size_t target = plan.targets.empty() ? 0 : plan.targets[si];
      const auto ids = parse_id_list(m.read(fs::path("engineer") / (tag + ".txt")));
      Json sub_summary{{"subset", subset_name(si)}, {"pool", ids.size()}};
      if (ids.empty()) {
        if (target > 0) throw ValidationError(tag + ": empty p-value subset, target is " + std::to_string(target));
        omic_summary.push_back(sub_summary);
        continue;
      }
      const LabeledDataset sub = d.select_features(ids);
      const LabeledDataset train = sub.select_samples(split.train);
      const LabeledDataset test = sub.select_samples(split.test);

      const std::size_t p = sub.n_features();
      const std::size_t pca_k = std::min({c.pca_components, train.n_samples(), p});
      std::vector<ScoreTable> tables{
          mutual_info_scores(train, c.bins), chi_square_scores(train, c.bins),
          pca_feature_scores(train, pca_k),
          rf_feature_importances(train, c.rf_trees, c.rf_max_depth, derive_seed(c.seed, tag + ".rf"))};
      std::string scores = "feature_id";
      for (const auto& t : tables) scores += "\t" + to_string(t.method);
      scores += "\n";
      for (std::size_t j = 0; j < p; ++j) {
        scores += tables[0].entries[j].feature_id;
        for (const auto& t : tables) scores += "\t" + format_double(t.entries[j].score);
        scores += "\n";
      }
      m.write(dir / (tag + ".scores.tsv"), scores);

      std::vector<std::vector<std::string>> best;
      std::string kbest = "method\trank\tfeature_id\n";
      for (const auto& t : tables) {
        const auto it = c.k_best.find(t.method);
        const std::size_t k = std::min(it == c.k_best.end() ? std::size_t{0} : it->second, p);
        best.push_back(select_k_best(t, k));
        for (std::size_t r = 0; r < best.back().size(); ++r)
          kbest += to_string(t.method) + "\t" + std::to_string(r + 1) + "\t" + best.back()[r] + "\n";
      }
      m.write(dir / (tag + ".kbest.tsv"), kbest);
      const SelectionResult venn = venn_partition(best);
      m.write(dir / (tag + ".venn.json"),
              Json{{"common", venn.common}, {"unique", venn.unique}, {"union_minus_common", venn.union_minus_common}}
                      .dump(2) + "\n");
      sub_summary["union"] = venn.unique.size();
      if (venn.unique.empty()) {
        if (target > 0) throw ValidationError(tag + ": no candidates after k-best selection");
        omic_summary.push_back(sub_summary);
        continue;
      }

      AucFilterOptions ao;
      ao.threshold = c.auc_threshold;
      ao.n_trees = c.auc_trees;
      ao.max_depth = c.auc_max_depth;
      ao.seed = derive_seed(c.seed, tag + ".auc");
      const AucFilterResult auc = auc_filter(train, test, venn.unique, ao);
      std::string auc_tsv = "feature_id\ttrain_auc\ttest_auc\tkept\n";
      std::map<std::string, double> test_auc;
      for (const auto& f : auc.evaluated) {
        auc_tsv += f.feature_id + "\t" + format_double(f.train_auc) + "\t" + format_double(f.test_auc) + "\t" +
                   (f.kept ? "1" : "0") + "\n";
        test_auc[f.feature_id] = f.test_auc;
      }
      m.write(dir / (tag + ".auc.tsv"), auc_tsv);
      sub_summary["auc_kept"] = auc.kept.size();
      if (target > auc.kept.size())
        throw ValidationError(tag + ": " + std::to_string(auc.kept.size()) +
                              " features passed the AUC filter, target is " + std::to_string(target));
      if (auc.kept.empty()) {
        omic_summary.push_back(sub_summary);
        continue;
      }

      const Matrix z = zscore_columns(train.select_features(auc.kept).values);
      std::vector<int> labels(auc.kept.size(), 1);
      if (auc.kept.size() >= 2) {
        const LinkageTable link = ward_linkage(pairwise_euclidean(z));
        m.write(dir / (tag + ".linkage.tsv"), format_linkage(link));
        if (c.cluster_criterion == CutCriterion::MaxClust) {
          const std::size_t mc = c.maxclust ? *c.maxclust : target;
          if (mc == 0) throw ValidationError(tag + ": maxclust needs select.cluster.maxclust or a subset target");
          labels = cut_tree(link, CutCriterion::MaxClust, static_cast<double>(std::min(mc, auc.kept.size())));
        } else {
          labels = cut_tree(link, CutCriterion::Distance, c.distance_threshold);
        }
      }
      m.write(dir / (tag + ".clusters.tsv"), format_cluster_labels(auc.kept, labels));
      std::vector<std::string> chosen;
      for (auto col : top_k_per_cluster(z, labels, c.k_per_cluster)) chosen.push_back(auc.kept[col]);
      if (target > 0) {
        if (chosen.size() < target)
          throw ValidationError(tag + ": clustering kept " + std::to_string(chosen.size()) + " features, target is " +
                                std::to_string(target));
        chosen.resize(target);
      }
      m.write(dir / (tag + ".selected.txt"), format_id_list(chosen));
      sub_summary["clusters"] = *std::max_element(labels.begin(), labels.end());
      sub_summary["selected"] = chosen.size();
      omic_summary.push_back(sub_summary);
      for (const auto& id : chosen) pooled.emplace_back(id, test_auc.at(id));
    }

    std::stable_sort(pooled.begin(), pooled.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    std::vector<std::string> final_ids;
    for (const auto& [id, auc] : pooled) final_ids.push_back(id);
    if (plan.final_count > 0 && final_ids.size() > plan.final_count) final_ids.resize(plan.final_count);
    m.write(dir / (name + ".final.txt"), format_id_list(final_ids));
    grand_total += final_ids.size();
    summary[name] = {{"subsets", omic_summary}, {"final", final_ids.size()}};
  }
  m.set("omics", summary);
  if (grand_total == 0) {
    m.finish();
    throw ValidationError("no features survived selection (AUC threshold " + format_double(c.auc_threshold) + ")");
  }
  m.finish();
}

void cmd_integrate(const PipelineConfig& c, const fs::path& out) {
  Manifest m(c, out, "integrate");
  std::vector<LabeledDataset> parts;
  std::vector<std::size_t> sizes;
  for (const auto& plan : c.omics) {
    const std::string name = kind_name(plan.kind);
    const auto ids = parse_id_list(m.read(fs::path("select") / (name + ".final.txt")));
    if (ids.empty()) continue;
    LabeledDataset d = read_dataset(m, fs::path("ingest") / name, plan.kind).select_features(ids);
    d.omic_kind = plan.kind;
    sizes.push_back(ids.size());
    parts.push_back(std::move(d));
  }
  if (parts.empty()) throw ValidationError("nothing to integrate: every omic selection is empty");
  LabeledDataset all;
  if (parts.size() == 1) {
    all = parts[0];
    const std::string prefix(feature_prefix(*all.omic_kind));
    for (auto& f : all.feature_ids) f = prefix + f;
  } else {
    all = intersect_and_join(parts);
  }
  all.omic_kind.reset();
  const std::size_t total = all.n_features();
  Json widths = Json::object();
  for (std::size_t w : c.widths) {
    if (w > total)
      throw ValidationError("integrated width " + std::to_string(w) + " exceeds the " + std::to_string(total) +
                            " selected features");
    const auto q = quotas(sizes, w);
    std::vector<std::size_t> cols;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      for (std::size_t i = 0; i < q[k]; ++i) cols.push_back(offset + i);
      offset += sizes[k];
    }
    write_dataset(m, dataset_stem(w), all.select_features(cols));
    widths[std::to_string(w)] = q;
  }
  m.set("per_omic", sizes);
  m.set("samples", all.n_samples());
  m.set("width_quotas", widths);
  m.finish();
}

void cmd_train(const PipelineConfig& c, const fs::path& out, const std::string& model) {
  const std::size_t width = model_width(c, model);
  Manifest m(c, out, (model_dir("train", model)).generic_string());
  const LabeledDataset d = read_dataset(m, dataset_stem(width), std::nullopt);
  const fs::path dir = model_dir("train", model);
  m.set("model", model);
  if (model.rfind("qnn", 0) == 0) {
    const QnnConfig q = qnn_config_for(c, model);
    const QnnTrainResult r = train(q, d);
    m.write(dir / "model.json", to_json(r.model).dump(2) + "\n");
    m.write(dir / "history.tsv", format_history(r.history));
    m.write(dir / "split.tsv", format_split(d, r.split));
  } else {
    const TrainTestSplit split = stratified_split(d.labels, c.qnn.test_fraction, c.seed);
    const LabeledDataset tr = d.select_samples(split.train);
    BaselineModel b;
    if (model == "lr") {
      b = lr_train(tr, c.lr);
    } else if (model == "mlp") {
      b = mlp_train(tr, c.mlp);
    } else {
      b = rf_train(tr, c.rf);
    }
    m.write(dir / "model.json", to_json(b).dump(2) + "\n");
    m.write(dir / "split.tsv", format_split(d, split));
  }
  m.finish();
}

void cmd_evaluate(const PipelineConfig& c, const fs::path& out, const std::string& model) {
  const std::size_t width = model_width(c, model);
  Manifest m(c, out, model_dir("evaluate", model).generic_string());
  const LabeledDataset d = read_dataset(m, dataset_stem(width), std::nullopt);
  const fs::path tdir = model_dir("train", model);
  const AnyModel am = parse_model(m.read(tdir / "model.json"), (tdir / "model.json").string());
  if (am.feature_ids() != d.feature_ids) throw ValidationError("model features do not match the integrated dataset");
  const TrainTestSplit split = parse_split(m.read(tdir / "split.tsv"), d);

  const auto probs = am.predict(d.values);
  std::vector<double> p_train, p_test;
  for (auto i : split.train) p_train.push_back(probs[i]);
  for (auto i : split.test) p_test.push_back(probs[i]);
  const auto y_train = gather(d.labels, split.train);
  const auto y_test = gather(d.labels, split.test);

  const fs::path dir = model_dir("evaluate", model);
  const Json metrics{{"model", model},
                     {"features", width},
                     {"train", partition_metrics(y_train, p_train)},
                     {"test", partition_metrics(y_test, p_test)}};
  m.write(dir / "metrics.json", metrics.dump(2) + "\n");

  std::vector<std::string> part(d.n_samples(), "train");
  for (auto i : split.test) part[i] = "test";
  std::string preds = "sample_id\tpartition\tlabel\tprobability\tprediction\n";
  for (std::size_t i = 0; i < d.n_samples(); ++i)
    preds += d.sample_ids[i] + "\t" + part[i] + "\t" + std::to_string(d.labels[i]) + "\t" + format_double(probs[i]) +
             "\t" + (probs[i] >= 0.5 ? "1" : "0") + "\n";
  m.write(dir / "predictions.tsv", preds);
  m.write(dir / "roc_test.tsv", format_roc_curve(roc_curve(y_test, p_test)));
  m.write(dir / "roc_train.tsv", format_roc_curve(roc_curve(y_train, p_train)));
  m.finish();
}

void cmd_report(const PipelineConfig& c, const fs::path& out, const std::string& model) {
  const std::size_t width = model_width(c, model);
  Manifest m(c, out, model_dir("report", model).generic_string());
  const LabeledDataset d = read_dataset(m, dataset_stem(width), std::nullopt);
  const fs::path tdir = model_dir("train", model);
  const AnyModel am = parse_model(m.read(tdir / "model.json"), (tdir / "model.json").string());
  if (am.feature_ids() != d.feature_ids) throw ValidationError("model features do not match the integrated dataset");
  const TrainTestSplit split = parse_split(m.read(tdir / "split.tsv"), d);

  std::vector<double> importance;
  if (am.qnn) {
    importance = weight_importance(*am.qnn, d.values, c.importance_mode);
  } else if (am.baseline->kind == BaselineKind::RF) {
    importance = am.baseline->forest.feature_importances();
  } else {
    importance = weight_importance(*am.baseline, d.values);
  }
  const auto stats = t_statistic(d, c.t_mode);
  auto report = build_report(importance, d, stats);
  if (!c.name_map.empty()) {
    const std::string text = read_text_file(c.name_map);
    m.read_external(c.name_map, text);
    apply_names(report, read_name_map(c.name_map));
  }
  const fs::path dir = model_dir("report", model);
  m.write(dir / "feature_report.tsv", format_feature_report(report));
  const auto top = top_n(report, c.top_n);
  m.write(dir / "top_features.tsv", format_feature_report(top));
  std::vector<std::string> top_ids;
  for (const auto& f : top) top_ids.push_back(f.feature_id);
  m.write(dir / "class_distributions.tsv", format_class_distributions(d, top_ids));

  const LabeledDataset test = d.select_samples(split.test);
  const auto probs = am.predict(test.values);
  std::vector<int> preds(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) preds[i] = probs[i] >= 0.5 ? 1 : 0;
  const DeviationRanking dev = tp_tn_deviation_scores(test, preds, c.deviation_top_n);
  std::string dev_tsv = "rank\tfeature_id\ttp_deviation\ttn_deviation\tscore\n";
  for (std::size_t r = 0; r < dev.top.size(); ++r) {
    const std::size_t j = test.feature_index(dev.top[r]);
    dev_tsv += std::to_string(r + 1) + "\t" + dev.top[r] + "\t" + format_double(dev.tp_deviation[j]) + "\t" +
               format_double(dev.tn_deviation[j]) + "\t" + format_double(dev.scores[j]) + "\n";
  }
  m.write(dir / "deviation_top.tsv", dev_tsv);
  if (am.qnn && fs::exists(out / tdir / "history.tsv")) m.write(dir / "loss_curve.tsv", m.read(tdir / "history.tsv"));
  m.finish();
}

void cmd_run(const PipelineConfig& c, const fs::path& out, const std::string& model) {
  if (c.input_omics.empty()) cmd_synth(c, out);
  cmd_ingest(c, out);
  cmd_engineer(c, out);
  cmd_select(c, out);
  cmd_integrate(c, out);
  cmd_train(c, out, model);
  cmd_evaluate(c, out, model);
  cmd_report(c, out, model);
}

}  // namespace omicq
