// ballrl: generate, verify, run, sweep and report on BallRL experiments.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ballrl/errors.hpp"
#include "ballrl/experiment.hpp"
#include "ballrl/generator.hpp"
#include "ballrl/instance_io.hpp"

namespace fs = std::filesystem;
namespace ex = ballrl::experiment;

namespace {

enum Exit { kOk = 0, kConfig = 1, kCertification = 2, kInternal = 3 };

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ballrl::FormatError("cannot write " + path.string());
  out << content;
}

std::string jsonl(const std::vector<ex::RunRecord>& records) {
  std::string out;
  for (const auto& r : records) out += ex::record_to_json(r) + "\n";
  return out;
}

int cmd_generate(const std::string& config_path, const std::optional<std::string>& out, std::size_t count,
                 std::uint64_t seed) {
  const ex::ExperimentConfig cfg = ex::load_config(config_path);
  if (!cfg.instance.generate) throw ballrl::ConfigError("generate needs an 'instance.generate' block");
  const fs::path dest = out ? fs::path(*out) : ex::output_dir(std::nullopt, &cfg) / "instance.json";
  for (std::size_t k = 0; k < count; ++k) {
    const ballrl::LinearQStarMdp mdp = ballrl::generate_instance(cfg.instance.generate->resolve(seed + k));
    const ballrl::AssumptionReport report = ballrl::verify_assumptions(mdp);
    if (!report.passed()) throw ballrl::CertificationFailure("generated instance failed: " + report.summary());
    const fs::path path = count == 1 ? dest : dest / ("instance_" + std::to_string(seed + k) + ".json");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    ballrl::save_instance(mdp, path);
    std::cout << "wrote " << path.string() << '\n';
  }
  return kOk;
}

int cmd_verify(const std::string& instance_path, double tol) {
  const ballrl::LinearQStarMdp mdp = ballrl::load_instance(instance_path);
  const ballrl::AssumptionReport report = ballrl::verify_assumptions(mdp, tol);
  for (const auto& c : report.checks) {
    std::printf("%-15s %s  %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL", c.detail.c_str());
  }
  std::printf("worst Bellman residual: %.3g\n", report.worst_residual);
  return report.passed() ? kOk : kCertification;
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& out, std::optional<int> threads) {
  ex::ExperimentConfig cfg = ex::load_config(config_path);
  if (threads) cfg.threads = *threads;
  const fs::path dir = ex::output_dir(out, &cfg);
  const auto records = ex::run_experiment(cfg);
  write_file(dir / "records.jsonl", jsonl(records));
  const auto summary = ex::summarize(records);
  write_file(dir / "summary.csv", ex::summary_csv(summary));
  for (const auto& row : summary) {
    std::printf("%s %s: %zu/%zu successes, mean gap %.6g, mean trajectories %.1f\n", row.algorithm.c_str(),
                row.config_hash.c_str(), row.successes, row.runs, row.mean_gap, row.mean_trajectories);
  }
  std::cout << "records in " << (dir / "records.jsonl").string() << '\n';
  return kOk;
}

int cmd_sweep(const std::string& config_path, const std::optional<std::string>& out, std::optional<int> threads) {
  ex::ExperimentConfig cfg = ex::load_config(config_path);
  if (threads) cfg.threads = *threads;
  const fs::path dir = ex::output_dir(out, &cfg);
  const ex::SweepResult result = ex::run_sweep(cfg);
  write_file(dir / "sweep.csv", ex::sweep_csv(result));
  write_file(dir / "records.jsonl", jsonl(result.records));
  write_file(dir / "summary.csv", ex::summary_csv(ex::summarize(result.records)));
  std::cout << result.records.size() << " runs; table in " << (dir / "sweep.csv").string() << '\n';
  return kOk;
}

int cmd_report(const std::string& records_path, const std::optional<std::string>& plot_path) {
  std::ifstream in(records_path, std::ios::binary);
  if (!in) throw ballrl::FormatError("cannot open records file " + records_path);
  const ex::ReportOutcome outcome = ex::read_records(in);
  for (const auto& e : outcome.errors) std::cerr << e << '\n';
  std::cout << ex::report_table(outcome);
  const fs::path plot = plot_path ? fs::path(*plot_path) : fs::path(records_path).parent_path() / "plot_data.csv";
  write_file(plot, ex::plot_data_csv(outcome.records));
  std::cout << "plot data in " << plot.string() << '\n';
  return outcome.errors.empty() ? kOk : kConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory-learning experiments for linear-Q* MDPs with ball-structured action sets"};
  app.require_subcommand(1);

  std::string config, instance, records;
  std::optional<std::string> out, plot;
  std::optional<int> threads;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  double tol = 1e-9;

  auto* gen = app.add_subcommand("generate", "Generate and certify instance files");
  gen->add_option("config", config, "Experiment config with an instance.generate block")->required();
  gen->add_option("-o,--out", out, "Output file (or directory when --count > 1)");
  gen->add_option("-n,--count", count, "Number of instances")->check(CLI::PositiveNumber);
  gen->add_option("-s,--seed", seed, "Run seed of the first instance");

  auto* ver = app.add_subcommand("verify", "Check an instance file against the modelling assumptions");
  ver->add_option("instance", instance, "Instance JSON")->required();
  ver->add_option("--tol", tol, "Tolerance");

  auto* run = app.add_subcommand("run", "Run a learner for every configured seed");
  run->add_option("config", config, "Experiment config")->required();
  run->add_option("-o,--out", out, "Output directory");
  run->add_option("-j,--threads", threads, "OpenMP threads per batch (0 = default)");

  auto* sweep = app.add_subcommand("sweep", "Run the cross product of the sweep axes");
  sweep->add_option("config", config, "Experiment config with a sweep block")->required();
  sweep->add_option("-o,--out", out, "Output directory");
  sweep->add_option("-j,--threads", threads, "OpenMP threads per batch (0 = default)");

  auto* rep = app.add_subcommand("report", "Summarize a records.jsonl file");
  rep->add_option("records", records, "JSON-lines records")->required();
  rep->add_option("--plot-data", plot, "Where to write the plot-data CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_generate(config, out, count, seed);
    if (*ver) return cmd_verify(instance, tol);
    if (*run) return cmd_run(config, out, threads);
    if (*sweep) return cmd_sweep(config, out, threads);
    return cmd_report(records, plot);
  } catch (const ballrl::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const ballrl::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const ballrl::CertificationFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCertification;
  } catch (const ballrl::RejectionBudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCertification;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
