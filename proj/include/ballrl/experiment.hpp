#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ballrl/convex_ballrl.hpp"
#include "ballrl/diffr_ballrl.hpp"
#include "ballrl/generator.hpp"
#include "ballrl/mdp.hpp"

namespace ballrl::experiment {

inline constexpr int kConfigVersion = 1;

/// Generator settings as written in a config file. Two conveniences are resolved
/// per run: a scalar `states_per_step` and a `radius_fraction` that scales the
/// radius cap 1/(H·B).
struct GeneratorSpec {
  GeneratorConfig base;
  std::optional<std::size_t> states_uniform;
  std::optional<std::pair<double, double>> radius_fraction;
  bool vary_with_seed = true;

  /// Concrete generator config for one run seed.
  GeneratorConfig resolve(std::uint64_t run_seed) const;
};

struct InstanceSource {
  std::optional<GeneratorSpec> generate;
  std::optional<std::filesystem::path> file;
};

enum class Algorithm { Convex, DiffR };

std::string to_string(Algorithm a);

struct AlgorithmSpec {
  Algorithm kind = Algorithm::Convex;
  ConvexConfig convex;
  DiffRConfig diffr;

  double epsilon() const { return kind == Algorithm::Convex ? convex.epsilon : diffr.epsilon; }
};

struct SweepSpec {
  std::optional<std::vector<std::size_t>> d;
  std::optional<std::vector<std::size_t>> H;
  std::optional<std::vector<double>> epsilon;
  std::optional<std::vector<std::size_t>> m;
  std::optional<std::vector<double>> m_fraction;
};

struct ExperimentConfig {
  InstanceSource instance;
  AlgorithmSpec algorithm;
  std::vector<std::uint64_t> seeds{0};
  int threads = 0;
  std::optional<std::string> output;
  std::optional<SweepSpec> sweep;
};

/// Parses a versioned JSON config. Unknown keys and out-of-range values throw
/// ConfigError; relative instance paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of everything that determines results (no output path, no thread count).
std::string canonical_config(const ExperimentConfig& cfg);
/// 16 hex digits of FNV-1a over canonical_config.
std::string config_hash(const ExperimentConfig& cfg);

struct RunRecord {
  std::string algorithm;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> instance_seed;
  std::size_t dim = 0;
  std::size_t horizon = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::optional<std::size_t> m;   // convex
  std::optional<std::size_t> m1;  // diffr
  std::optional<std::size_t> m2;  // diffr
  std::optional<bool> overrides;  // diffr
  std::optional<std::size_t> outer_iterations;  // diffr
  std::uint64_t trajectories_used = 0;
  std::uint64_t trajectories_expected = 0;
  double epsilon_gap = 0.0;
  bool success = false;
  double wall_time_s = 0.0;

  /// The batch size a success-vs-M plot uses: m for convex, m2 for diffr.
  std::optional<std::size_t> plot_m() const { return m ? m : m2; }
};

/// Instance for one run: generated (and certified) or loaded and verified.
/// Throws CertificationFailure when a loaded instance fails verification.
LinearQStarMdp prepare_instance(const ExperimentConfig& cfg, std::uint64_t seed);

/// One learner run on a prepared instance, including the budget audit and the
/// post-hoc gap from the oracle.
RunRecord run_once(const ExperimentConfig& cfg, const LinearQStarMdp& mdp, std::uint64_t seed);

/// One record per configured seed, in seed order.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

std::string record_to_json(const RunRecord& r);
/// Throws FormatError describing the first problem.
RunRecord record_from_json(const std::string& line);

struct SummaryRow {
  std::string algorithm;
  std::string config_hash;
  std::size_t runs = 0;
  std::size_t successes = 0;
  double mean_gap = 0.0;
  double max_gap = 0.0;
  double mean_trajectories = 0.0;

  double success_rate() const { return runs ? double(successes) / double(runs) : 0.0; }
};

/// Groups by (algorithm, config hash) in order of first appearance.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);

struct SweepCell {
  std::size_t index = 0;
  ExperimentConfig config;
};

/// Cross product of the listed axes, first axis slowest. Throws ConfigError("no cells").
std::vector<SweepCell> sweep_cells(const ExperimentConfig& cfg);

struct SweepResult {
  std::vector<RunRecord> records;
  std::vector<std::size_t> cell_of_record;
};

SweepResult run_sweep(const ExperimentConfig& cfg);
std::string sweep_csv(const SweepResult& result);

struct ReportOutcome {
  std::vector<RunRecord> records;
  std::vector<std::string> errors;    // "line N: ..."
  std::vector<std::string> warnings;
};

/// Reads JSON-lines records, skipping and reporting malformed lines.
ReportOutcome read_records(std::istream& in);
/// Human-readable grouped table (one section per algorithm).
std::string report_table(const ReportOutcome& outcome);
/// Long-format plot data: series,algorithm,config_hash,x,y.
std::string plot_data_csv(const std::vector<RunRecord>& records);

/// Output directory: explicit value, then the config, then $BALLRL_OUTPUT_DIR, then "ballrl-out".
std::filesystem::path output_dir(const std::optional<std::string>& cli, const ExperimentConfig* cfg);

}  // namespace ballrl::experiment
