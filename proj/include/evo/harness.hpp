#pragma once

#include "evo/diagnostics.hpp"
#include "evo/objectives.hpp"
#include "evo/optimizers.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace evo {

// ------------------------------------------------------------ config

struct BenchmarkConfig {
  int dim = 256;
  int budget = 3000;
  int population = 40;
  // Entries: cholesky, diagonal, sphere-exp, sphere-inv, ga, random. A
  // table named after an entry overrides that optimizer's parameters.
  std::vector<std::string> optimizers{"cholesky", "sphere-exp", "ga", "random"};
  std::map<std::string, nlohmann::json> optimizer_params;
  std::string objective = "quadric";  // or "noise"
  std::vector<DepthProfile> profiles{DepthProfile::Shallow, DepthProfile::Mid, DepthProfile::Deep};
  int landscapes_per_profile = 1;
  double baseline_fraction = 0.3;
  double optimum_norm = 0.0;  // 0: default sphere radius
  std::vector<double> noise_levels{0.0, 0.2, 0.5};
  int repetitions = 5;
  std::uint64_t seed = 1;
  std::string output_dir = "runs";
  std::string fingerprint;  // filled by the loaders

  int generations() const { return budget / population; }
  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
};

// Flat TOML subset: key = value, [table] headers, strings, numbers,
// booleans and single-line arrays.
nlohmann::json parse_toml_subset(const std::string& text);
BenchmarkConfig config_from_json(const nlohmann::json& j);
BenchmarkConfig parse_config(const std::string& text, bool is_json);
BenchmarkConfig load_config(const std::filesystem::path& path);
std::string config_fingerprint(const BenchmarkConfig& cfg);

std::unique_ptr<Optimizer> make_optimizer(const BenchmarkConfig& cfg, const std::string& name, std::uint64_t seed);

// ------------------------------------------------------------ records

struct GenerationRecord {
  Vector mean;                     // proposal centre after this generation's update
  double step_size = 0.0;          // NaN where undefined
  std::vector<double> raw, noisy, clean;
};

struct RunRecord {
  std::string fingerprint;
  std::string run_id;
  std::string optimizer;
  std::string landscape;
  std::string profile;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  int dim = 0;
  int population = 0;
  Vector initial_mean;
  std::vector<GenerationRecord> generations;
  double runtime_s = 0.0;
  double final_clean_best = 0.0;
  long evaluations = 0;
  std::optional<CovMetrics> cov;
  bool complete = false;
  std::string error;

  MeanTrajectory trajectory() const;
  Vector evolution_direction() const;  // last mean minus initial mean
};

void write_record(const std::filesystem::path& path, const RunRecord& rec);
RunRecord read_record(const std::filesystem::path& path);
// Reads every record under dir/records (or dir itself). Unreadable files are
// reported through `warnings`.
std::vector<RunRecord> load_records(const std::filesystem::path& dir, std::vector<std::string>* warnings = nullptr);

// Drives one optimizer against one objective for `generations` steps.
RunRecord run_single(Optimizer& opt, Objective& obj, int generations, RunRecord meta = {});

// ------------------------------------------------------------ grid

struct GridOptions {
  std::filesystem::path out_dir;  // empty: keep records in memory only
  int threads = 1;
  bool resume = false;
};

struct GridResult {
  std::vector<RunRecord> records;  // completed runs, in cell order
  std::vector<std::string> failures;
  int resumed = 0;
};

struct GridCell {
  std::string optimizer;
  int profile_index = 0;
  int landscape_index = 0;
  int alpha_index = 0;
  int repetition = 0;
  std::string run_id;
  std::uint64_t seed = 0;
};

std::vector<GridCell> enumerate_cells(const BenchmarkConfig& cfg);
GridResult run_grid(const BenchmarkConfig& cfg, const GridOptions& opt = {});

// ------------------------------------------------------------ summary

struct ScoreEntry {
  std::string optimizer;
  std::string profile;
  std::string unit;
  double alpha = 0.0;
  double clean_best = 0.0;
  double runtime_s = 0.0;
};

std::vector<ScoreEntry> score_entries(const std::vector<RunRecord>& records);
// Divides by the per-unit maximum; entries of all-zero units are dropped.
std::vector<ScoreEntry> normalized_entries(const std::vector<ScoreEntry>& entries,
                                           std::vector<std::string>* excluded = nullptr);

struct SummaryCell {
  std::string optimizer;
  std::string profile;  // "all" for rows pooled over profiles
  double alpha = 0.0;
  int n = 0;
  double mean = 0.0;
  double sem = 0.0;  // NaN when n < 2
  double mean_runtime_s = 0.0;
};

struct PairTest {
  std::string profile;
  double alpha = 0.0;
  std::string a, b;
  WelchResult welch;
  bool valid = false;  // false when a group has fewer than two values
};

struct RatioRow {
  std::optional<double> alpha;  // empty: pooled over all noise levels
  double cma_mean = 0.0;
  double ga_mean = 0.0;
  double ratio = 0.0;
};

struct SummaryTable {
  std::vector<SummaryCell> cells;
  std::vector<SummaryCell> pooled;
  std::vector<PairTest> tests;
  std::vector<RatioRow> ratios;
  std::vector<std::string> excluded_units;
  std::vector<std::string> warnings;

  const SummaryCell* find(const std::string& optimizer, const std::string& profile, double alpha) const;
  const PairTest* find_test(const std::string& a, const std::string& b, const std::string& profile, double alpha) const;
};

bool is_cma_family(const std::string& optimizer);

SummaryTable summarize(const std::vector<ScoreEntry>& entries);
SummaryTable summarize(const std::vector<RunRecord>& records);
std::string render_summary_markdown(const SummaryTable& table);

// ------------------------------------------------------------ CSV

extern const char* const kTrajectoryCsvHeader;
extern const char* const kSummaryCsvHeader;

void export_trajectory_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path);
void export_summary_csv(const SummaryTable& table, const std::filesystem::path& path);
std::string csv_escape(const std::string& field);
std::string format_double(double v);  // 17 significant digits

// ------------------------------------------------------------ analyze

struct AnalyzeOptions {
  std::vector<std::string> analyses{"pca", "cosfit", "normgrowth", "covmetrics"};
  std::optional<std::filesystem::path> frame;
  std::filesystem::path out_dir;  // CSVs are written here when non-empty
  int cutoff = 0;
  int shuffles = 500;
};

struct AnalysisReport {
  std::string markdown;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> failures;  // analysis -> message
  std::vector<std::filesystem::path> csv_files;
};

AnalysisReport analyze(const std::vector<RunRecord>& records, const AnalyzeOptions& opt);

}  // namespace evo
