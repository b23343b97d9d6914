#include "evo/harness.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

namespace evo {

namespace fs = std::filesystem;

namespace {

std::string alpha_tag(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

}  // namespace

std::vector<GridCell> enumerate_cells(const BenchmarkConfig& cfg) {
  std::vector<GridCell> cells;
  const bool quadric = cfg.objective == "quadric";
  const int n_prof = quadric ? static_cast<int>(cfg.profiles.size()) : 1;
  const int n_land = quadric ? cfg.landscapes_per_profile : 1;
  for (const auto& name : cfg.optimizers)
    for (int p = 0; p < n_prof; ++p)
      for (int l = 0; l < n_land; ++l)
        for (int a = 0; a < static_cast<int>(cfg.noise_levels.size()); ++a)
          for (int r = 0; r < cfg.repetitions; ++r) {
            GridCell c;
            c.optimizer = name;
            c.profile_index = p;
            c.landscape_index = l;
            c.alpha_index = a;
            c.repetition = r;
            const std::string unit = quadric ? profile_name(cfg.profiles[p]) + "-" + std::to_string(l) : "noise";
            c.run_id = name + "__" + unit + "__a" + alpha_tag(cfg.noise_levels[a]) + "__r" + std::to_string(r);
            c.seed = derive_seed(cfg.seed, {hash_string(name), static_cast<std::uint64_t>(p),
                                            static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(a),
                                            static_cast<std::uint64_t>(r)});
            cells.push_back(std::move(c));
          }
  return cells;
}

GridResult run_grid(const BenchmarkConfig& cfg, const GridOptions& opt) {
  cfg.validate();
  const std::string fingerprint = cfg.fingerprint.empty() ? config_fingerprint(cfg) : cfg.fingerprint;
  const bool quadric = cfg.objective == "quadric";
  const int T = cfg.generations();

  // Landscapes depend only on (master seed, profile), so every optimizer and
  // noise level sees the same units.
  std::vector<std::vector<QuadricLandscape>> suites;
  if (quadric) {
    for (std::size_t p = 0; p < cfg.profiles.size(); ++p) {
      Rng rng(derive_seed(cfg.seed, {hash_string("landscape"), p}));
      SuiteOptions so;
      so.count = cfg.landscapes_per_profile;
      so.baseline_fraction = cfg.baseline_fraction;
      so.optimum_norm = cfg.optimum_norm;
      suites.push_back(make_landscape_suite(cfg.dim, cfg.profiles[p], rng, so));
    }
  }

  const fs::path rec_dir = opt.out_dir.empty() ? fs::path{} : opt.out_dir / "records";
  if (!rec_dir.empty()) {
    fs::create_directories(rec_dir);
    std::ofstream(opt.out_dir / "config.json") << cfg.to_json().dump(2) << "\n";
  }

  const std::vector<GridCell> cells = enumerate_cells(cfg);
  std::vector<std::optional<RunRecord>> results(cells.size());
  GridResult out;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<int> resumed{0};

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const GridCell& c = cells[i];
      const fs::path file = rec_dir.empty() ? fs::path{} : rec_dir / (c.run_id + ".evr");
      if (opt.resume && !file.empty() && fs::exists(file)) {
        try {
          RunRecord prev = read_record(file);
          if (prev.complete && prev.fingerprint == fingerprint) {
            results[i] = std::move(prev);
            ++resumed;
            continue;
          }
        } catch (const Error&) {
          // unreadable: run the cell again
        }
      }
      RunRecord meta;
      meta.fingerprint = fingerprint;
      meta.run_id = c.run_id;
      meta.optimizer = c.optimizer;
      meta.alpha = cfg.noise_levels[c.alpha_index];
      meta.seed = c.seed;
      try {
        std::unique_ptr<Objective> obj;
        if (quadric) {
          const QuadricLandscape& L = suites[c.profile_index][c.landscape_index];
          meta.landscape = L.id;
          meta.profile = profile_name(cfg.profiles[c.profile_index]);
          obj = std::make_unique<QuadricObjective>(L, NoiseSpec{meta.alpha, derive_seed(c.seed, {hash_string("noise")})});
        } else {
          meta.landscape = "noise";
          meta.profile = "noise";
          obj = noise_only_objective(cfg.dim, derive_seed(c.seed, {hash_string("noise")}));
        }
        auto optimizer = make_optimizer(cfg, c.optimizer, c.seed);
        RunRecord rec = run_single(*optimizer, *obj, T, std::move(meta));
        if (!file.empty()) write_record(file, rec);
        if (rec.complete) {
          results[i] = std::move(rec);
        } else {
          std::lock_guard lk(mu);
          out.failures.push_back(c.run_id + ": " + rec.error);
        }
      } catch (const std::exception& e) {
        std::lock_guard lk(mu);
        out.failures.push_back(c.run_id + ": " + e.what());
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(cells.size())));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }

  for (auto& r : results)
    if (r) out.records.push_back(std::move(*r));
  out.resumed = resumed.load();
  std::sort(out.failures.begin(), out.failures.end());
  if (!opt.out_dir.empty() && !out.failures.empty()) {
    std::ofstream f(opt.out_dir / "failures.log", std::ios::app);
    for (const auto& s : out.failures) f << s << "\n";
  }
  return out;
}

}  // namespace evo
