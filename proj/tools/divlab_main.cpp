// divlab: command-line driver.
//
//   divlab classify   <scenario> [--dim D] [--variant V] [--config PATH] [--out DIR] [--seed N]
//   divlab probe      <scenario> ...   (classifier + semigroup/resolvent probes)
//   divlab simulate   <scenario> ...   (path ensemble)
//   divlab occupation <scenario> ...   (time-average histogram, d=2)
//   divlab scenarios                   (list the catalog)
//   divlab run-all    [--out DIR] [--seed N]
//
// Exit status: 0 all expected conclusions observed and agreeing, 1 runtime
// error, 2 contradiction, 3 agreement matrix left inconclusive rows.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "divlab/runner.hpp"

namespace {

struct CommonArgs {
  CLI::App* cmd = nullptr;
  std::string scenario;
  std::string config;
  std::string out;
  std::string variant;
  std::uint64_t seed = 0;
  int dim = 0;
  CLI::Option* o_scenario = nullptr;
  CLI::Option* o_config = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_variant = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_dim = nullptr;
};

CommonArgs add_run_subcommand(CLI::App& app, const char* name, const char* desc) {
  CommonArgs c;
  c.cmd = app.add_subcommand(name, desc);
  c.o_scenario =
      c.cmd->add_option("scenario", c.scenario, "scenario id (see `divlab scenarios`)");
  c.o_config = c.cmd->add_option("--config", c.config, "config file (key = value sections)");
  c.o_out = c.cmd->add_option("--out", c.out, "output directory (default: out)");
  c.o_variant = c.cmd->add_option("--variant", c.variant, "scenario variant");
  c.o_seed = c.cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  c.o_dim = c.cmd->add_option("--dim", c.dim, "dimension, 2 or 3 (overrides the config)");
  return c;
}

int execute_run(const CommonArgs& c, std::optional<std::vector<std::string>> tasks,
                std::optional<std::vector<std::string>> restrict_tasks) {
  divlab::CliOverrides cli;
  if (c.o_scenario->count() > 0) cli.scenario = c.scenario;
  if (c.o_out->count() > 0) cli.out_dir = c.out;
  if (c.o_variant->count() > 0) cli.variant = c.variant;
  if (c.o_seed->count() > 0) cli.seed = c.seed;
  if (c.o_dim->count() > 0) cli.dim = c.dim;
  cli.tasks = std::move(tasks);
  cli.restrict_tasks = std::move(restrict_tasks);

  std::optional<divlab::ConfigFile> cfg;
  if (c.o_config->count() > 0) cfg = divlab::ConfigFile::parse_file(c.config);

  divlab::RunConfig rc = divlab::load_run_config(cfg ? &*cfg : nullptr, cli);
  divlab::RunOutcome ro = divlab::run_one(rc);
  std::printf("wrote %s\n", ro.report_path.c_str());
  std::printf("agreement: agree=%d contradictions=%d inconclusive=%d\n", ro.agree,
              ro.contradictions, ro.inconclusive);
  if (ro.task_error) std::printf("one or more tasks raised errors; see the report\n");
  std::printf("exit: %d\n", ro.exit_code);
  return ro.exit_code;
}

int list_scenarios() {
  for (const divlab::ScenarioInfo& s : divlab::scenario_catalog()) {
    std::string dims;
    for (size_t i = 0; i < s.dims.size(); ++i)
      dims += (i ? "," : "") + divlab::fmt_i(s.dims[i]);
    std::string variants;
    for (size_t i = 0; i < s.variants.size(); ++i)
      variants += (i ? "," : "") + s.variants[i];
    if (variants.empty()) variants = "-";
    std::printf("%-26s dims=%-4s variants=%s\n", s.id.c_str(), dims.c_str(),
                variants.c_str());
    std::printf("    %s\n", s.summary.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for divergence-type generators: criteria "
               "classification plus independent semigroup and path probes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(divlab::kDivlabVersion));

  CommonArgs c_classify =
      add_run_subcommand(app, "classify", "evaluate the criteria and classify");
  CommonArgs c_probe = add_run_subcommand(
      app, "probe", "classify plus semigroup and resolvent probes");
  CommonArgs c_simulate =
      add_run_subcommand(app, "simulate", "simulate the path ensemble");
  CommonArgs c_occupation = add_run_subcommand(
      app, "occupation", "time-average occupation histogram (dimension 2)");
  CLI::App* c_list = app.add_subcommand("scenarios", "list the scenario catalog");

  CLI::App* c_all = app.add_subcommand("run-all", "run the built-in scenario plan");
  std::string all_out = "out";
  std::uint64_t all_seed = 1;
  c_all->add_option("--out", all_out, "output directory (default: out)");
  c_all->add_option("--seed", all_seed, "master seed (default: 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c_list->parsed()) return list_scenarios();
    if (c_all->parsed()) {
      divlab::RunOutcome ro = divlab::run_all(all_out, all_seed);
      std::fputs(ro.report_text.c_str(), stdout);
      std::printf("wrote %s\n", ro.report_path.c_str());
      return ro.exit_code;
    }
    if (c_classify.cmd->parsed())
      return execute_run(c_classify, std::vector<std::string>{"classify"}, std::nullopt);
    if (c_probe.cmd->parsed()) {
      return execute_run(c_probe, std::nullopt,
                         std::vector<std::string>{"classify", "semigroup-probe",
                                                  "green-probe"});
    }
    if (c_simulate.cmd->parsed())
      return execute_run(c_simulate, std::vector<std::string>{"simulate"}, std::nullopt);
    if (c_occupation.cmd->parsed())
      return execute_run(c_occupation, std::vector<std::string>{"occupation"},
                         std::nullopt);
  } catch (const divlab::Error& e) {
    std::fprintf(stderr, "[error] %s: %s\n", divlab::err_kind_name(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[error] %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "[error] no subcommand selected\n");
  return 1;
}
