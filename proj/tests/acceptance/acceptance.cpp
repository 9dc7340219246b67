#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "../oracles.hpp"
#include "../qnn_check.hpp"
#include "omicq/baselines.hpp"
#include "omicq/feature_select.hpp"
#include "omicq/hier_cluster.hpp"
#include "omicq/metrics.hpp"
#include "omicq/pipeline.hpp"
#include "omicq/statevector.hpp"
#include "omicq/tsv.hpp"

using namespace omicq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Dense 2^n x 2^n matrix of a one-qubit gate: entry (i, j) is g[bit_q(i)][bit_q(j)]
// when every other bit of i and j agrees, else 0.
std::vector<Complex> dense_single(const std::array<Complex, 4>& g, std::size_t q, std::size_t n) {
  const std::size_t d = std::size_t{1} << n, mask = std::size_t{1} << (n - 1 - q);
  std::vector<Complex> m(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if ((i & ~mask) == (j & ~mask)) m[i * d + j] = g[((i & mask) ? 2 : 0) + ((j & mask) ? 1 : 0)];
  return m;
}

std::vector<Complex> dense_cz(std::size_t q1, std::size_t q2, std::size_t n) {
  const std::size_t d = std::size_t{1} << n;
  std::vector<Complex> m(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const bool both = ((i >> (n - 1 - q1)) & 1) && ((i >> (n - 1 - q2)) & 1);
    m[i * d + i] = both ? -1.0 : 1.0;
  }
  return m;
}

std::vector<Complex> matvec(const std::vector<Complex>& m, const std::vector<Complex>& v) {
  const std::size_t d = v.size();
  std::vector<Complex> out(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += m[i * d + j] * v[j];
    out[i] = acc;
  }
  return out;
}

double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome simulator_soundness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> qubits(1, 8), layers(1, 5);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::normal_distribution<double> g;
  double worst_norm = 0, worst_gate = 0;
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = qubits(rng), depth = layers(rng);
    std::vector<double> x(std::size_t{1} << n);
    for (auto& v : x) v = g(rng);
    auto s = amplitude_encode(x);
    for (std::size_t l = 0; l < depth; ++l) {
      for (std::size_t q = 0; q < n; ++q) {
        const RotParams r{angle(rng), angle(rng), angle(rng)};
        const auto before = s.amplitudes;
        apply_rot(s, q, r);
        const auto o = oracle::rot(r.theta, r.phi, r.lambda);
        const std::array<Complex, 4> gm{o[0][0], o[0][1], o[1][0], o[1][1]};
        worst_gate = std::max(worst_gate, max_diff(s.amplitudes, matvec(dense_single(gm, q, n), before)));
      }
      for (std::size_t q = 0; q + 1 < n; ++q) {
        const auto before = s.amplitudes;
        apply_cz(s, q, q + 1);
        worst_gate = std::max(worst_gate, max_diff(s.amplitudes, matvec(dense_cz(q, q + 1, n), before)));
      }
      worst_norm = std::max(worst_norm, std::fabs(s.norm() - 1.0));
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_norm <= 1e-12 && worst_gate <= 1e-12 && secs < 5.0;
  o.detail = fmt("max |norm-1| %.2e", worst_norm) + fmt(", max gate deviation %.2e", worst_gate) + fmt(", %.2fs", secs);
  return o;
}

Outcome encoding_fidelity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::normal_distribution<double> g;
  const std::size_t lengths[] = {32, 64, 256};
  double worst = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t len = lengths[i % 3];
    std::vector<double> x(len);
    double ss = 0;
    for (auto& v : x) {
      v = g(rng);
      ss += v * v;
    }
    const auto s = amplitude_encode(x);
    for (std::size_t j = 0; j < len; ++j) worst = std::max(worst, std::fabs(std::norm(s.amplitudes[j]) - x[j] * x[j] / ss));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 1.0, fmt("max probability deviation %.2e", worst) + fmt(", %.3fs", secs)};
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  std::size_t violations = 0;
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const auto c = qnn_check::small_config(5, 3, 8);
    const auto p = qnn_check::random_params(c, rng);
    Matrix x(2, c.n_features);
    for (std::size_t r = 0; r < 2; ++r) {
      const auto v = qnn_check::random_input(c.n_features, rng);
      std::copy(v.begin(), v.end(), x.row(r).begin());
    }
    const auto check = qnn_check::check_gradients(c, p, x, {static_cast<int>(i % 2), 1});
    violations += check.violations;
    worst = std::max(worst, check.worst_abs);
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 120.0,
          std::to_string(violations) + " components outside tolerance" + fmt(", max abs error %.2e", worst) +
              fmt(", %.1fs", secs)};
}

Outcome training_capability() {
  const auto t0 = Clock::now();
  SyntheticSpec spec;
  spec.n_lusc = spec.n_luad = 300;
  SyntheticOmicSpec o;
  o.n_features = 32;
  o.effects = {{32, 2.0}};
  spec.omics = {o};
  const auto cohort = generate_synthetic_cohort(spec, 42);
  const auto d = join_clinical(cohort.omics[0], cohort.clinical);

  auto c = QnnConfig::preset("qnn32");
  c.seed = 42;
  c.epochs = 60;
  const auto res = train(c, d);
  const auto test = d.select_samples(res.split.test);
  const auto train_set = d.select_samples(res.split.train);
  const auto qnn_pred = predict_labels(res.model, test.values);
  const double qnn_acc = classification_scores(confusion(test.labels, qnn_pred)).accuracy;

  const auto lr = lr_train(train_set);
  const auto probs = baseline_predict(lr, test.values);
  std::vector<int> lr_pred(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) lr_pred[i] = probs[i] >= 0.5;
  const double lr_acc = classification_scores(confusion(test.labels, lr_pred)).accuracy;
  const double secs = seconds_since(t0);
  return {qnn_acc >= 0.90 && qnn_acc >= lr_acc - 0.02 && secs < 300.0,
          fmt("QNN32 test accuracy %.4f", qnn_acc) + fmt(", LR %.4f", lr_acc) + fmt(", %.1fs", secs)};
}

std::size_t count_lines(const fs::path& p) {
  const auto t = read_text_file(p);
  return static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n'));
}

Outcome pipeline_shape(const fs::path& work) {
  const auto cfg = load_config(fs::path(OMICQ_SOURCE_DIR) / "configs" / "full.json");
  const fs::path out = work / "full";
  fs::remove_all(out);
  const auto t_prep = Clock::now();
  cmd_synth(cfg, out);
  cmd_ingest(cfg, out);
  cmd_engineer(cfg, out);
  const double prep = seconds_since(t_prep);
  const auto t0 = Clock::now();
  cmd_select(cfg, out);
  cmd_integrate(cfg, out);
  const double secs = seconds_since(t0);

  const std::size_t dna = count_lines(out / "select" / "DNAme.final.txt");
  const std::size_t rna = count_lines(out / "select" / "RNAseq.final.txt");
  const std::size_t mir = count_lines(out / "select" / "miRNAseq.final.txt");
  const std::size_t width = read_labeled_dataset(out / "integrate" / "multiomic_256.matrix.tsv",
                                                 out / "integrate" / "multiomic_256.labels.tsv")
                                .n_features();
  const bool ok = dna == 85 && rna == 86 && mir == 85 && width == 256 && secs < 600.0;
  fs::remove_all(out);
  return {ok, "per-omic " + std::to_string(dna) + "/" + std::to_string(rna) + "/" + std::to_string(mir) +
                  ", integrated width " + std::to_string(width) + fmt(", select+integrate %.1fs", secs) +
                  fmt(" (synth+ingest+engineer %.1fs)", prep)};
}

Outcome scorer_oracles() {
  std::mt19937_64 rng(606);
  double worst = 0;
  for (int i = 0; i < 500; ++i) {
    std::uniform_int_distribution<int> nx(1, 6), ny(1, 4), len(2, 200);
    const int kx = nx(rng), ky = ny(rng), n = len(rng);
    std::uniform_int_distribution<int> xs(0, kx - 1), ys(0, ky - 1);
    std::vector<int> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      x[static_cast<std::size_t>(k)] = xs(rng);
      y[static_cast<std::size_t>(k)] = ys(rng);
    }
    worst = std::max(worst, std::fabs(mutual_information(x, y) - oracle::mutual_information(x, y)));
    worst = std::max(worst, std::fabs(chi_square(x, y) - oracle::chi_square(x, y)));
  }
  const double hand = chi_square_table({{20, 0}, {0, 20}});
  return {worst <= 1e-10 && hand == 40.0, fmt("max deviation %.2e", worst) + fmt(", chi2 [[20,0],[0,20]] = %.17g", hand)};
}

Outcome clustering_oracle() {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<std::size_t> sizes(2, 20), dims(1, 5);
  std::normal_distribution<double> g;
  double worst = 0;
  std::size_t mismatched = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = sizes(rng), dim = dims(rng);
    Matrix x(dim, n);
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < dim; ++k) pts[j][k] = x(k, j) = g(rng);
    const auto link = ward_linkage(pairwise_euclidean(x));
    const auto naive = oracle::naive_ward(pts);
    for (std::size_t s = 0; s < naive.size(); ++s) {
      if (link.merges[s].left != naive[s].left || link.merges[s].right != naive[s].right) ++mismatched;
      worst = std::max(worst, std::fabs(link.merges[s].height - naive[s].height));
    }
  }
  Matrix line(1, 3);
  line(0, 1) = 1;
  line(0, 2) = 10;
  const auto hand = ward_linkage(pairwise_euclidean(line));
  const double h1 = hand.merges[0].height, h2 = hand.merges[1].height;
  const bool hand_ok = h1 == 1.0 && std::fabs(h2 - 19.0 / std::sqrt(3.0)) <= 1e-12;
  return {mismatched == 0 && worst <= 1e-9 && hand_ok,
          std::to_string(mismatched) + " merge mismatches" + fmt(", max height deviation %.2e", worst) +
              fmt(", hand heights {%.17g", h1) + fmt(", %.17g}", h2)};
}

Outcome auc_oracle() {
  std::mt19937_64 rng(808);
  std::size_t mismatched = 0;
  for (int i = 0; i < 500; ++i) {
    std::uniform_int_distribution<int> len(2, 120), levels(1, 12);
    const int n = len(rng), lv = levels(rng);
    std::uniform_int_distribution<int> lab(0, 1), sc(0, lv);
    std::vector<int> y(static_cast<std::size_t>(n));
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      y[static_cast<std::size_t>(k)] = lab(rng);
      s[static_cast<std::size_t>(k)] = static_cast<double>(sc(rng)) / lv;
    }
    y[0] = 0;
    y[1] = 1;
    const auto [num, den] = oracle::auc_pairs(y, s);
    const auto r = roc_auc_ratio(y, s);
    if (r.numerator * den != num * r.denominator || roc_auc(y, s) != oracle::ratio(num, den)) ++mismatched;
  }
  return {mismatched == 0, std::to_string(mismatched) + " of 500 sets differ from pair counting"};
}

Outcome metric_formulas() {
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<std::uint64_t> u(1, 1000);
  std::size_t mismatched = 0;
  for (int i = 0; i < 50; ++i) {
    const ConfusionMatrix cm{u(rng), u(rng), u(rng), u(rng)};
    const auto s = classification_scores(cm);
    const bool ok = s.accuracy == oracle::ratio(cm.tp + cm.tn, cm.total()) &&
                    s.precision == oracle::ratio(cm.tp, cm.tp + cm.fp) &&
                    s.recall == oracle::ratio(cm.tp, cm.tp + cm.fn) &&
                    s.f1 == oracle::ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
    mismatched += !ok;
  }
  return {mismatched == 0, std::to_string(mismatched) + " of 50 confusion matrices differ"};
}

Outcome determinism(const fs::path& work) {
  const auto cfg = load_config(fs::path(OMICQ_SOURCE_DIR) / "configs" / "quick.json");
  const fs::path a = work / "run_a", b = work / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  cmd_run(cfg, a, cfg.model);
  cmd_run(cfg, b, cfg.model);
  std::size_t files = 0, manifests = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), a);
    if (rel.filename() == "manifest.json") ++manifests;
    if (!fs::exists(b / rel) || read_text_file(e.path()) != read_text_file(b / rel)) ++differing;
  }
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) ++differing;
  fs::remove_all(a);
  fs::remove_all(b);
  return {differing == 0 && manifests >= 8 && files > manifests,
          std::to_string(files) + " files (" + std::to_string(manifests) + " manifests), " + std::to_string(differing) +
              " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t only = argc > 1 ? std::stoul(argv[1]) : 0;
  const fs::path work = fs::temp_directory_path() / ("omicq_acceptance_" + std::to_string(only));
  fs::create_directories(work);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"simulator soundness", simulator_soundness},
      {"encoding fidelity", encoding_fidelity},
      {"gradient correctness", gradient_correctness},
      {"training capability", training_capability},
      {"pipeline shape", [&] { return pipeline_shape(work); }},
      {"scorer oracles", scorer_oracles},
      {"clustering oracle", clustering_oracle},
      {"AUC oracle", auc_oracle},
      {"metric formulas", metric_formulas},
      {"determinism", [&] { return determinism(work); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && only != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
