// Command-line front end for the benchmark harness.
#include "evo/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string self_exe(const char* argv0) {
  std::error_code ec;
  auto p = fs::read_symlink("/proc/self/exe", ec);
  return ec ? std::string(argv0) : p.string();
}

int cmd_run(const std::string& config_path, std::string out_dir, int threads, bool resume) {
  evo::BenchmarkConfig cfg;
  try {
    cfg = evo::load_config(config_path);
  } catch (const evo::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (out_dir.empty()) out_dir = cfg.output_dir;
  const auto cells = evo::enumerate_cells(cfg);
  std::cerr << "running " << cells.size() << " cells (fingerprint " << cfg.fingerprint << ") into " << out_dir << "\n";
  const evo::GridResult res = evo::run_grid(cfg, {out_dir, threads, resume});
  std::cerr << res.records.size() << " completed, " << res.resumed << " resumed, " << res.failures.size() << " failed\n";
  for (const auto& f : res.failures) std::cerr << "  failed: " << f << "\n";
  if (!res.records.empty()) {
    const evo::SummaryTable tab = evo::summarize(res.records);
    evo::export_summary_csv(tab, fs::path(out_dir) / "summary.csv");
    evo::export_trajectory_csv(res.records, fs::path(out_dir) / "trajectories.csv");
    std::ofstream(fs::path(out_dir) / "report.md") << evo::render_summary_markdown(tab);
  }
  return res.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_analyze(const std::string& runs, const std::string& analyses, const std::string& frame, const std::string& out,
                int cutoff, int shuffles) {
  std::vector<std::string> warnings;
  const auto records = evo::load_records(runs, &warnings);
  evo::AnalyzeOptions opt;
  opt.analyses = split_csv(analyses);
  if (!frame.empty()) opt.frame = frame;
  opt.out_dir = out.empty() ? fs::path(runs) / "analysis" : fs::path(out);
  opt.cutoff = cutoff;
  opt.shuffles = shuffles;
  evo::AnalysisReport rep = evo::analyze(records, opt);
  for (const auto& w : warnings) rep.warnings.push_back(w);
  fs::create_directories(opt.out_dir);
  std::ofstream(opt.out_dir / "report.md") << rep.markdown;
  std::cout << rep.markdown;
  for (const auto& [name, msg] : rep.failures) std::cerr << "analysis '" << name << "' failed: " << msg << "\n";
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  return rep.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_report(const std::string& runs, const std::string& out) {
  std::vector<std::string> warnings;
  const auto records = evo::load_records(runs, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::string md;
  if (records.empty()) {
    md = "# Benchmark summary\n\nNo run records were found.\n";
    std::cerr << "warning: no run records under " << runs << "\n";
  } else {
    md = evo::render_summary_markdown(evo::summarize(records));
  }
  std::ofstream os(out);
  if (!os) {
    std::cerr << "cannot write " << out << "\n";
    return 1;
  }
  os << md;
  return kExitOk;
}

int cmd_extern_demo(const std::string& exe, int dim, int budget, int population, std::uint64_t seed) {
  auto transport = std::make_unique<evo::SubprocessTransport>(std::vector<std::string>{exe, "peer"});
  evo::ExternalObjective obj(std::move(transport), dim);
  evo::CholeskyConfig cc;
  cc.dim = dim;
  cc.population = population;
  evo::CholeskyCMA opt(cc, seed);
  const evo::RunRecord rec = evo::run_single(opt, obj, budget / population);
  obj.shutdown();
  std::cout << "external peer run: " << rec.evaluations << " evaluations, " << obj.requests_sent()
            << " eval messages, best score " << rec.final_clean_best << (rec.complete ? "" : " (aborted: " + rec.error + ")")
            << "\n";
  return rec.complete ? kExitOk : 1;
}

int cmd_make_frame(const std::string& out, int d, int k, double kappa, std::uint64_t seed) {
  evo::Rng rng(seed);
  evo::write_eigenframe(out, evo::make_synthetic_frame(d, k, kappa, rng));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Derivative-free optimizer benchmark and trajectory diagnostics"};
  app.require_subcommand(1);

  std::string config, out, runs, analyses = "pca,cosfit,normgrowth,covmetrics", frame;
  int threads = 1, cutoff = 0, shuffles = 500;
  bool resume = false;

  auto* run = app.add_subcommand("run", "Execute a benchmark grid");
  run->add_option("--config", config, "Config file (TOML-style or JSON)")->required();
  run->add_option("--out", out, "Output directory (default: config 'output')");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--resume", resume, "Skip cells that already have a completed record");

  auto* an = app.add_subcommand("analyze", "Run trajectory diagnostics over persisted runs");
  an->add_option("--runs", runs, "Run directory")->required();
  an->add_option("--analyses", analyses, "Comma list of pca,cosfit,normgrowth,covmetrics,align");
  an->add_option("--frame", frame, "Eigenframe file for the align analysis");
  an->add_option("--out", out, "Directory for report.md and CSVs (default: <runs>/analysis)");
  an->add_option("--cutoff", cutoff, "Top-group cutoff for alignment (default: frame cutoff)");
  an->add_option("--shuffles", shuffles, "Shuffle controls for alignment")->check(CLI::PositiveNumber);

  std::string report_out = "report.md";
  auto* rep = app.add_subcommand("report", "Write the Markdown summary table");
  rep->add_option("--runs", runs, "Run directory")->required();
  rep->add_option("--out", report_out, "Output Markdown file");

  int dim = 32, budget = 3000, population = 40;
  std::uint64_t seed = 1;
  auto* demo = app.add_subcommand("extern-demo", "Optimize against a sample external peer process");
  demo->add_option("--dim", dim)->check(CLI::PositiveNumber);
  demo->add_option("--budget", budget)->check(CLI::PositiveNumber);
  demo->add_option("--population", population)->check(CLI::Range(2, 100000));
  demo->add_option("--seed", seed);

  auto* peer = app.add_subcommand("peer", "Sample external peer speaking NDJSON on stdio");
  peer->group("");

  int k = 0;
  double kappa = 1e6;
  auto* mf = app.add_subcommand("make-frame", "Write a synthetic eigenframe file");
  mf->add_option("--out", out, "Output file")->required();
  mf->add_option("--dim", dim)->required()->check(CLI::PositiveNumber);
  mf->add_option("--k", k, "Basis size (default: dim)");
  mf->add_option("--kappa", kappa, "Eigenvalue ratio largest/smallest");
  mf->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, out, threads, resume);
    if (*an) return cmd_analyze(runs, analyses, frame, out, cutoff, shuffles);
    if (*rep) return cmd_report(runs, report_out);
    if (*demo) return cmd_extern_demo(self_exe(argv[0]), dim, budget, population, seed);
    if (*peer) return evo::run_sample_peer(std::cin, std::cout);
    if (*mf) return cmd_make_frame(out, dim, k > 0 ? k : dim, kappa, seed);
  } catch (const evo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == evo::Errc::ConfigError ? kExitConfig : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
