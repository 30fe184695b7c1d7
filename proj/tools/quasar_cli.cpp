// Command-line front end for the QuaSAR experiment harness.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quasar/runner.hpp"

namespace {

void print_file(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) std::cout << quasar::read_text_file(path);
}

int fail(const std::string& command, const std::exception& e) {
  quasar::Json summary{{"ok", false}, {"command", command}, {"error", e.what()}};
  std::cerr << summary.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QuaSAR prompting harness: evaluation, ablation, robustness, "
               "teacher annotation, data scaling, self-correction, reporting"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "run configuration file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  quasar::CliOverrides overrides;
  std::string backend;
  app.add_option("--backend", backend, "model backend")
      ->check(CLI::IsMember({"live", "replay"}));
  std::string out_dir;
  app.add_option("--out", out_dir, "output directory (overrides config)");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "run seed (overrides config)");
  int max_in_flight = 0;
  auto* mif_opt = app.add_option("--max-in-flight", max_in_flight, "request concurrency cap")
                      ->check(CLI::PositiveNumber);

  std::vector<std::string> fraction_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "accuracy per task and strategy");
  CLI::App* ablation_cmd = app.add_subcommand("ablation", "step-omission delta grid");
  CLI::App* robustness_cmd =
      app.add_subcommand("robustness", "perturbed-input accuracy with deltas");
  CLI::App* annotate_cmd =
      app.add_subcommand("annotate", "generate, gate, and export teacher demonstrations");
  CLI::App* scaling_cmd = app.add_subcommand("scaling", "nested training-data subsets");
  scaling_cmd->add_option("--fraction", fraction_args, "subset fraction in (0,1], repeatable");
  CLI::App* self_correct_cmd =
      app.add_subcommand("self-correct", "re-prompt persisted failures through correctors");
  CLI::App* report_cmd = app.add_subcommand("report", "rebuild tables from persisted outcomes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    if (code != 0) {
      std::cerr << quasar::Json{{"ok", false}, {"error", e.what()}}.dump() << "\n";
    }
    return code;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    quasar::RunConfig config = quasar::load_run_config(config_path);
    if (!backend.empty()) overrides.backend = backend;
    if (!out_dir.empty()) overrides.out_dir = out_dir;
    if (*seed_opt) overrides.seed = seed;
    if (*mif_opt) overrides.max_in_flight = max_in_flight;
    quasar::apply_overrides(config, overrides);

    quasar::Runner runner(std::move(config));
    const auto& out = runner.config().out_dir;

    if (eval_cmd->parsed()) {
      quasar::cmd_eval(runner);
      print_file(out / "eval_accuracy.txt");
    } else if (ablation_cmd->parsed()) {
      quasar::cmd_ablation(runner);
      print_file(out / "ablation.txt");
    } else if (robustness_cmd->parsed()) {
      quasar::cmd_robustness(runner);
      print_file(out / "robustness.txt");
    } else if (annotate_cmd->parsed()) {
      quasar::ExportResult result = quasar::cmd_annotate(runner);
      std::cout << result.stats.to_json().dump(2) << "\n"
                << "export: " << result.export_path.string() << "\n"
                << "sha256: " << result.export_sha256 << "\n";
    } else if (scaling_cmd->parsed()) {
      std::vector<quasar::Decimal> fractions;
      for (const auto& f : fraction_args) fractions.push_back(quasar::Decimal::parse(f));
      quasar::cmd_scaling(runner, fractions);
      print_file(out / "scaling.txt");
    } else if (self_correct_cmd->parsed()) {
      quasar::cmd_self_correct(runner);
      print_file(out / "self_correct.txt");
    } else if (report_cmd->parsed()) {
      quasar::cmd_report(runner);
      print_file(out / "report_accuracy.txt");
    }
  } catch (const std::exception& e) {
    return fail(command, e);
  }
  return 0;
}
