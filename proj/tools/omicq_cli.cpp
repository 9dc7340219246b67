// omicq: multi-omic subtype pipeline driver.
#include <CLI11.hpp>
#include <cstdio>
#include <functional>
#include <map>

#include "omicq/errors.hpp"
#include "omicq/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = "omicq_out";
  std::optional<std::uint64_t> seed;
  std::string model;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-omic lung subtype pipeline with a simulated quantum classifier"};
  app.require_subcommand(1);
  Options opt;

  using Stage = std::function<void(const omicq::PipelineConfig&, const omicq::fs::path&, const std::string&)>;
  const std::vector<std::tuple<std::string, std::string, Stage>> stages{
      {"synth", "write a synthetic cohort", [](auto& c, auto& o, auto&) { omicq::cmd_synth(c, o); }},
      {"ingest", "parse omic matrices and join clinical labels", [](auto& c, auto& o, auto&) { omicq::cmd_ingest(c, o); }},
      {"engineer", "t-test statistics and p-value subsets", [](auto& c, auto& o, auto&) { omicq::cmd_engineer(c, o); }},
      {"select", "scorers, AUC filter and cluster reduction", [](auto& c, auto& o, auto&) { omicq::cmd_select(c, o); }},
      {"integrate", "join selected omics into fixed-width datasets",
       [](auto& c, auto& o, auto&) { omicq::cmd_integrate(c, o); }},
      {"train", "train the chosen model", [](auto& c, auto& o, auto& m) { omicq::cmd_train(c, o, m); }},
      {"evaluate", "metrics, predictions and ROC points", [](auto& c, auto& o, auto& m) { omicq::cmd_evaluate(c, o, m); }},
      {"report", "feature importance and plot data", [](auto& c, auto& o, auto& m) { omicq::cmd_report(c, o, m); }},
      {"run", "every stage in order", [](auto& c, auto& o, auto& m) { omicq::cmd_run(c, o, m); }},
  };

  std::map<CLI::App*, Stage> dispatch;
  for (const auto& [name, help, fn] : stages) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON configuration file");
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "override every seed in the configuration");
    sub->add_option("--model", opt.model, "qnn256, qnn64, qnn32, lr, mlp or rf")
        ->check(CLI::IsMember({"qnn256", "qnn64", "qnn32", "lr", "mlp", "rf"}));
    dispatch[sub] = fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    omicq::PipelineConfig cfg = opt.config.empty() ? omicq::default_config() : omicq::load_config(opt.config);
    if (opt.seed) omicq::set_seed(cfg, *opt.seed);
    const std::string model = opt.model.empty() ? cfg.model : opt.model;
    for (CLI::App* sub : app.get_subcommands()) dispatch.at(sub)(cfg, opt.out, model);
  } catch (const omicq::ValidationError& e) {
    std::fprintf(stderr, "omicq: %s\n", e.what());
    return 1;
  } catch (const omicq::IoError& e) {
    std::fprintf(stderr, "omicq: %s\n", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "omicq: %s\n", e.what());
    return 2;
  }
  return 0;
}
