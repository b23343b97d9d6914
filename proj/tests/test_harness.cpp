#include "evo/harness.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace evo;
using testing::errc_of;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("evo_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

BenchmarkConfig small_config() {
  BenchmarkConfig c;
  c.dim = 16;
  c.budget = 200;
  c.population = 10;
  c.optimizers = {"cholesky", "ga"};
  c.repetitions = 2;
  c.seed = 11;
  return c;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::vector<std::string> lines;
  std::string l;
  while (std::getline(is, l)) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(l);
  }
  return lines;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("TOML-style config parsing") {
    const std::string text = R"(# comment
dim = 64
budget = 400
population = 20
optimizers = ["cholesky", "sphere-exp"]
noise = [0.0, 0.5]
repetitions = 3
seed = 99
output = "out/x"

[landscape]
profiles = ["deep"]
baseline_fraction = 0.25

[cholesky]
sigma0 = 2.0
)";
    const BenchmarkConfig c = parse_config(text, false);
    CHECK(c.dim == 64);
    CHECK(c.generations() == 20);
    CHECK(c.optimizers == std::vector<std::string>{"cholesky", "sphere-exp"});
    CHECK(c.noise_levels == std::vector<double>{0.0, 0.5});
    CHECK(c.profiles == std::vector<DepthProfile>{DepthProfile::Deep});
    CHECK(c.baseline_fraction == 0.25);
    CHECK(c.seed == 99);
    CHECK(c.optimizer_params.at("cholesky")["sigma0"] == 2.0);

    const BenchmarkConfig j = parse_config(c.to_json().dump(), true);
    CHECK(config_fingerprint(j) == config_fingerprint(c));
    BenchmarkConfig moved = c;
    moved.output_dir = "elsewhere";
    CHECK(config_fingerprint(moved) == config_fingerprint(c));
    moved.seed = 100;
    CHECK(config_fingerprint(moved) != config_fingerprint(c));
  }

  TEST_CASE("config errors") {
    const char* bad[] = {
        "dim = 64\nbudget = 401\npopulation = 20\n",
        "repetitions = 0\n",
        "optimizers = [\"cmaes-xl\"]\n",
        "dim = \"big\"\n",
        "unknown_key = 1\n",
        "[landscape]\nprofiles = [\"abyssal\"]\n",
        "noise = [-0.1]\n",
        "[ga]\ntemperature = 1.0\noptimizers = [\"cholesky\"]\n",
        "dim = 8\n",
        "this is not toml\n",
    };
    for (const char* t : bad) {
      CAPTURE(t);
      CHECK(errc_of([&] { parse_config(t, false); }) == Errc::ConfigError);
    }
    CHECK(errc_of([] { parse_config("{\"dim\": [1]}", true); }) == Errc::ConfigError);
    CHECK(errc_of([] { load_config("/nonexistent/cfg.toml"); }).has_value());
  }

  TEST_CASE("example configs load") {
    for (const char* name : {"desk.toml", "noise.toml"}) {
      CAPTURE(name);
      const fs::path p = fs::path(EVO_SOURCE_DIR) / "configs" / name;
      CHECK_NOTHROW(load_config(p));
    }
  }

  TEST_CASE("grid arithmetic and seeding") {
    const BenchmarkConfig c = small_config();
    const auto cells = enumerate_cells(c);
    CHECK(cells.size() == 2u * 3u * 3u * 2u);
    std::vector<std::string> ids;
    std::vector<std::uint64_t> seeds;
    for (const auto& cell : cells) {
      ids.push_back(cell.run_id);
      seeds.push_back(cell.seed);
    }
    std::sort(ids.begin(), ids.end());
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
  }

  TEST_CASE("grid run: determinism, budget and thread invariance") {
    const BenchmarkConfig c = small_config();
    const GridResult a = run_grid(c);
    GridOptions par;
    par.threads = 4;
    const GridResult b = run_grid(c, par);
    REQUIRE(a.records.size() == 36);
    REQUIRE(b.records.size() == 36);
    CHECK(a.failures.empty());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      const auto& x = a.records[i];
      const auto& y = b.records[i];
      CHECK(x.run_id == y.run_id);
      CHECK(x.final_clean_best == y.final_clean_best);
      CHECK(x.trajectory().means == y.trajectory().means);
      CHECK(static_cast<int>(x.generations.size()) <= c.generations());
      CHECK(x.evaluations <= c.budget);
      CHECK(x.fingerprint == config_fingerprint(c));
    }
  }

  TEST_CASE("budget accounting for every optimizer") {
    BenchmarkConfig c = small_config();
    c.optimizers = {"cholesky", "diagonal", "sphere-exp", "sphere-inv", "ga", "random"};
    c.budget = 3000;
    c.population = 40;
    c.noise_levels = {0.2};
    c.repetitions = 1;
    c.profiles = {DepthProfile::Mid};
    const GridResult r = run_grid(c);
    REQUIRE(r.records.size() == 6);
    for (const auto& rec : r.records) {
      CAPTURE(rec.optimizer);
      CHECK(rec.generations.size() == 75);
      CHECK(rec.evaluations == 3000);
      for (const auto& g : rec.generations) CHECK(g.raw.size() == 40);
    }
  }

  TEST_CASE("records persist and resume") {
    const fs::path dir = scratch_dir("resume");
    BenchmarkConfig c = small_config();
    c.noise_levels = {0.0};
    c.profiles = {DepthProfile::Shallow};
    GridOptions o;
    o.out_dir = dir;
    const GridResult first = run_grid(c, o);
    REQUIRE(first.records.size() == 4);
    const auto loaded = load_records(dir);
    REQUIRE(loaded.size() == 4);

    const RunRecord back = read_record(dir / "records" / (first.records[0].run_id + ".evr"));
    CHECK(back.trajectory().means == first.records[0].trajectory().means);
    CHECK(back.generations[3].noisy == first.records[0].generations[3].noisy);
    CHECK(back.fingerprint == first.records[0].fingerprint);

    fs::remove(dir / "records" / (first.records[1].run_id + ".evr"));
    o.resume = true;
    const GridResult second = run_grid(c, o);
    CHECK(second.resumed == 3);
    CHECK(second.records.size() == 4);
    CHECK(second.records[1].final_clean_best == first.records[1].final_clean_best);

    // a different config does not reuse the old records
    c.seed = 12;
    const GridResult third = run_grid(c, o);
    CHECK(third.resumed == 0);
    fs::remove_all(dir);
  }

  TEST_CASE("corrupt record files are reported, not fatal") {
    const fs::path dir = scratch_dir("corrupt");
    fs::create_directories(dir / "records");
    std::ofstream(dir / "records" / "junk.evr") << "not a record";
    std::vector<std::string> warnings;
    const auto recs = load_records(dir, &warnings);
    CHECK(recs.empty());
    CHECK(warnings.size() == 1);
    CHECK(errc_of([&] { read_record(dir / "records" / "junk.evr"); }) == Errc::CorruptData);
    fs::remove_all(dir);
  }

  TEST_CASE("CSV export") {
    const fs::path dir = scratch_dir("csv");
    BenchmarkConfig c = small_config();
    c.noise_levels = {0.5};
    const GridResult r = run_grid(c);
    export_trajectory_csv(r.records, dir / "traj.csv");
    const auto lines = read_lines(dir / "traj.csv");
    REQUIRE(!lines.empty());
    CHECK(lines[0] == kTrajectoryCsvHeader);
    std::size_t total = 0;
    for (const auto& rec : r.records) total += rec.generations.size();
    CHECK(lines.size() == total + 1);

    // max_noisy column reproduces the stored values exactly
    const auto head = split_csv_line(lines[0]);
    const auto col = std::find(head.begin(), head.end(), "max_noisy") - head.begin();
    const auto row = split_csv_line(lines[1]);
    const auto& g0 = r.records[0].generations[0];
    CHECK(std::strtod(row[col].c_str(), nullptr) == *std::max_element(g0.noisy.begin(), g0.noisy.end()));

    const SummaryTable t = summarize(r.records);
    export_summary_csv(t, dir / "summary.csv");
    const auto s = read_lines(dir / "summary.csv");
    CHECK(s[0] == kSummaryCsvHeader);
    CHECK(s.size() == t.cells.size() + t.pooled.size() + 1);

    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(std::strtod(format_double(0.1 + 0.2).c_str(), nullptr) == 0.1 + 0.2);
    CHECK(errc_of([&] { export_trajectory_csv(r.records, "/nonexistent/dir/x.csv"); }) == Errc::IoError);
    fs::remove_all(dir);
  }

  TEST_CASE("summary statistics") {
    std::vector<ScoreEntry> e;
    for (double v : {1.0, 2.0, 3.0}) e.push_back({"cholesky", "deep", "u", 0.0, v, 1.0});
    for (double v : {4.0, 5.0, 6.0}) e.push_back({"ga", "deep", "u", 0.0, v, 2.0});
    const SummaryTable t = summarize(e);
    const auto* test = t.find_test("cholesky", "ga", "deep", 0.0);
    REQUIRE(test);
    CHECK(test->valid);
    CHECK(test->welch.t == doctest::Approx(-3.674).epsilon(1e-3));
    REQUIRE(t.find("ga", "deep", 0.0));
    CHECK(t.find("ga", "deep", 0.0)->mean == doctest::Approx(5.0 / 6.0));
    CHECK(t.find("cholesky", "deep", 0.0)->mean_runtime_s == doctest::Approx(1.0));
    bool pooled_ratio = false;
    for (const auto& r : t.ratios) pooled_ratio = pooled_ratio || !r.alpha.has_value();
    CHECK(pooled_ratio);
    CHECK(render_summary_markdown(t).find("CMA-family mean / GA mean") != std::string::npos);

    std::vector<ScoreEntry> same = e;
    for (auto& x : same) x.clean_best = 2.0;
    CHECK(summarize(same).find_test("cholesky", "ga", "deep", 0.0)->welch.t == 0.0);

    std::vector<ScoreEntry> lone{{"cholesky", "deep", "u", 0.0, 1.0, 0.0}, {"ga", "deep", "u", 0.0, 2.0, 0.0}};
    const SummaryTable l = summarize(lone);
    CHECK_FALSE(l.warnings.empty());
    const auto* lt = l.find_test("cholesky", "ga", "deep", 0.0);
    CHECK((lt == nullptr || !lt->valid));
    CHECK(l.find("ga", "deep", 0.0)->mean == 1.0);

    CHECK(errc_of([] { summarize(std::vector<ScoreEntry>{}); }) == Errc::InsufficientData);
    CHECK(is_cma_family("cholesky"));
    CHECK(is_cma_family("sphere-exp"));
    CHECK_FALSE(is_cma_family("ga"));
  }

  TEST_CASE("normalization is idempotent") {
    std::vector<ScoreEntry> e{{"a", "mid", "u1", 0.0, 10, 0}, {"b", "mid", "u1", 0.0, 40, 0},
                              {"a", "mid", "u2", 0.0, 3, 0},  {"b", "mid", "u2", 0.0, 1, 0},
                              {"a", "mid", "z", 0.0, 0, 0}};
    std::vector<std::string> excluded;
    const auto once = normalized_entries(e, &excluded);
    const auto twice = normalized_entries(once);
    REQUIRE(once.size() == 4);
    CHECK(excluded == std::vector<std::string>{"z"});
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice[i].clean_best == once[i].clean_best);
    const auto s1 = summarize(once), s2 = summarize(twice);
    for (std::size_t i = 0; i < s1.cells.size(); ++i) CHECK(s1.cells[i].mean == s2.cells[i].mean);
  }

  TEST_CASE("analyze") {
    const AnalysisReport empty = analyze({}, AnalyzeOptions{});
    CHECK_FALSE(empty.warnings.empty());
    CHECK(empty.failures.empty());

    BenchmarkConfig c = small_config();
    c.objective = "noise";
    c.optimizers = {"cholesky"};
    c.noise_levels = {0.0};
    c.repetitions = 3;
    const GridResult r = run_grid(c);
    AnalyzeOptions o;
    o.analyses = {"pca", "cosfit", "normgrowth", "covmetrics", "align", "bogus"};
    const AnalysisReport rep = analyze(r.records, o);
    CHECK(rep.failures.count("align") == 1);
    CHECK(rep.failures.at("align").find("--frame") != std::string::npos);
    CHECK(rep.failures.count("bogus") == 1);
    CHECK(rep.failures.count("pca") == 0);
    CHECK(rep.markdown.find("theory") != std::string::npos);
  }

  TEST_CASE("CLI exit codes") {
    const fs::path dir = scratch_dir("cli");
    std::ofstream(dir / "bad.toml") << "dim = \"x\"\n";
    const std::string exe = EVOBENCH_PATH;
    auto run = [](const std::string& cmd) {
      const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
      return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(run(exe + " run --config " + (dir / "bad.toml").string()) == 2);
    std::ofstream(dir / "ok.toml") << "dim = 16\nbudget = 40\npopulation = 10\noptimizers = [\"random\"]\n"
                                      "noise = [0.0]\nrepetitions = 1\n[landscape]\nprofiles = [\"mid\"]\n";
    CHECK(run(exe + " run --config " + (dir / "ok.toml").string() + " --out " + (dir / "runs").string()) == 0);
    CHECK(run(exe + " report --runs " + (dir / "runs").string() + " --out " + (dir / "r.md").string()) == 0);
    CHECK(fs::exists(dir / "r.md"));
    CHECK(run(exe + " analyze --runs " + (dir / "runs").string() + " --analyses normgrowth") == 0);
    fs::remove_all(dir);
  }
}
