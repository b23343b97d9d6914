#include "evo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace evo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v, const char* spec = "%.4g") {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

SummaryCell make_cell(const std::string& opt, const std::string& profile, double alpha,
                      const std::vector<double>& xs, const std::vector<double>& rt) {
  SummaryCell c{opt, profile, alpha, static_cast<int>(xs.size()), mean(xs), kNaN, mean(rt)};
  if (xs.size() >= 2) c.sem = sem(xs);
  return c;
}

}  // namespace

bool is_cma_family(const std::string& optimizer) {
  for (const char* p : {"cholesky", "diagonal", "sphere"})
    if (optimizer.rfind(p, 0) == 0) return true;
  return false;
}

std::vector<ScoreEntry> score_entries(const std::vector<RunRecord>& records) {
  std::vector<ScoreEntry> out;
  for (const auto& r : records)
    if (r.complete) out.push_back({r.optimizer, r.profile, r.landscape, r.alpha, r.final_clean_best, r.runtime_s});
  return out;
}

std::vector<ScoreEntry> normalized_entries(const std::vector<ScoreEntry>& entries, std::vector<std::string>* excluded) {
  std::map<std::string, std::vector<double>> per_unit;
  for (const auto& e : entries) per_unit[e.unit].push_back(e.clean_best);
  const NormalizedScores ns = normalize_scores(per_unit);
  if (excluded) *excluded = ns.excluded;
  std::map<std::string, std::size_t> cursor;
  std::vector<ScoreEntry> out;
  for (const auto& e : entries) {
    const std::size_t k = cursor[e.unit]++;
    const auto it = ns.scores.find(e.unit);
    if (it == ns.scores.end()) continue;
    ScoreEntry n = e;
    n.clean_best = it->second[k];
    out.push_back(n);
  }
  return out;
}

const SummaryCell* SummaryTable::find(const std::string& optimizer, const std::string& profile, double alpha) const {
  for (const auto* v : {&cells, &pooled})
    for (const auto& c : *v)
      if (c.optimizer == optimizer && c.profile == profile && c.alpha == alpha) return &c;
  return nullptr;
}

const PairTest* SummaryTable::find_test(const std::string& a, const std::string& b, const std::string& profile,
                                        double alpha) const {
  for (const auto& t : tests)
    if (t.a == a && t.b == b && t.profile == profile && t.alpha == alpha) return &t;
  return nullptr;
}

SummaryTable summarize(const std::vector<ScoreEntry>& entries) {
  if (entries.empty()) throw Error(Errc::InsufficientData, "no records to summarize");
  SummaryTable tab;
  const std::vector<ScoreEntry> norm = normalized_entries(entries, &tab.excluded_units);

  std::vector<std::string> opts, profiles;
  std::set<double> alphas;
  for (const auto& e : norm) {
    if (std::find(opts.begin(), opts.end(), e.optimizer) == opts.end()) opts.push_back(e.optimizer);
    if (std::find(profiles.begin(), profiles.end(), e.profile) == profiles.end()) profiles.push_back(e.profile);
    alphas.insert(e.alpha);
  }

  auto collect = [&](const std::string& o, const std::string* prof, const double* alpha, std::vector<double>& xs,
                     std::vector<double>& rt) {
    xs.clear();
    rt.clear();
    for (const auto& e : norm)
      if (e.optimizer == o && (!prof || e.profile == *prof) && (!alpha || e.alpha == *alpha)) {
        xs.push_back(e.clean_best);
        rt.push_back(e.runtime_s);
      }
  };

  std::vector<double> xs, rt, ys, rt2;
  auto add_tests = [&](const std::string& label, const std::string* prof, double alpha) {
    for (std::size_t i = 0; i < opts.size(); ++i)
      for (std::size_t j = i + 1; j < opts.size(); ++j) {
        collect(opts[i], prof, &alpha, xs, rt);
        collect(opts[j], prof, &alpha, ys, rt2);
        if (xs.empty() || ys.empty()) continue;
        PairTest t{label, alpha, opts[i], opts[j], {}, false};
        if (xs.size() >= 2 && ys.size() >= 2) {
          t.welch = welch_t(xs, ys);
          t.valid = true;
        } else {
          tab.warnings.push_back("InsufficientData: t-test omitted for " + opts[i] + " vs " + opts[j] + " (" +
                                 label + ", alpha=" + fmt(alpha, "%g") + ")");
        }
        tab.tests.push_back(t);
      }
  };

  for (double a : alphas) {
    for (const auto& p : profiles) {
      for (const auto& o : opts) {
        collect(o, &p, &a, xs, rt);
        if (xs.empty()) continue;
        tab.cells.push_back(make_cell(o, p, a, xs, rt));
        if (xs.size() < 2)
          tab.warnings.push_back("InsufficientData: single record for " + o + " (" + p + ", alpha=" + fmt(a, "%g") + ")");
      }
      add_tests(p, &p, a);
    }
    for (const auto& o : opts) {
      collect(o, nullptr, &a, xs, rt);
      if (!xs.empty()) tab.pooled.push_back(make_cell(o, "all", a, xs, rt));
    }
    add_tests("all", nullptr, a);
  }

  auto ratio_row = [&](std::optional<double> alpha) {
    std::vector<double> cma, ga;
    for (const auto& e : norm) {
      if (alpha && e.alpha != *alpha) continue;
      if (is_cma_family(e.optimizer)) cma.push_back(e.clean_best);
      if (e.optimizer.rfind("ga", 0) == 0) ga.push_back(e.clean_best);
    }
    if (cma.empty() || ga.empty()) return;
    RatioRow r{alpha, mean(cma), mean(ga), 0.0};
    r.ratio = r.ga_mean > 0 ? r.cma_mean / r.ga_mean : kNaN;
    tab.ratios.push_back(r);
  };
  for (double a : alphas) ratio_row(a);
  ratio_row(std::nullopt);
  return tab;
}

SummaryTable summarize(const std::vector<RunRecord>& records) { return summarize(score_entries(records)); }

std::string render_summary_markdown(const SummaryTable& t) {
  std::ostringstream os;
  os << "# Benchmark summary\n\n";
  os << "Scores are best clean scores divided by the per-landscape maximum over all runs.\n\n";
  os << "## Mean normalized clean score by profile\n\n";
  os << "| optimizer | profile | alpha | n | mean | SEM | runtime (s) |\n|---|---|---|---|---|---|---|\n";
  for (const auto& c : t.cells)
    os << "| " << c.optimizer << " | " << c.profile << " | " << fmt(c.alpha, "%g") << " | " << c.n << " | "
       << fmt(c.mean) << " | " << fmt(c.sem) << " | " << fmt(c.mean_runtime_s, "%.3g") << " |\n";
  os << "\n## Pooled over profiles\n\n";
  os << "| optimizer | alpha | n | mean | SEM | runtime (s) |\n|---|---|---|---|---|---|\n";
  for (const auto& c : t.pooled)
    os << "| " << c.optimizer << " | " << fmt(c.alpha, "%g") << " | " << c.n << " | " << fmt(c.mean) << " | "
       << fmt(c.sem) << " | " << fmt(c.mean_runtime_s, "%.3g") << " |\n";
  os << "\n## CMA-family mean / GA mean\n\n| alpha | CMA-family mean | GA mean | ratio |\n|---|---|---|---|\n";
  for (const auto& r : t.ratios)
    os << "| " << (r.alpha ? fmt(*r.alpha, "%g") : std::string("all")) << " | " << fmt(r.cma_mean) << " | "
       << fmt(r.ga_mean) << " | " << fmt(r.ratio) << " |\n";
  os << "\n## Pooled Welch t-tests\n\n| alpha | A | B | t | df | p (two-sided) | p (A > B) |\n|---|---|---|---|---|---|---|\n";
  for (const auto& x : t.tests)
    if (x.profile == "all" && x.valid)
      os << "| " << fmt(x.alpha, "%g") << " | " << x.a << " | " << x.b << " | " << fmt(x.welch.t) << " | "
         << fmt(x.welch.df) << " | " << fmt(x.welch.p_two_sided, "%.3g") << " | " << fmt(x.welch.p_greater, "%.3g")
         << " |\n";
  if (!t.excluded_units.empty()) {
    os << "\nExcluded units (never scored above 0):";
    for (const auto& u : t.excluded_units) os << " " << u;
    os << "\n";
  }
  if (!t.warnings.empty()) {
    os << "\n## Warnings\n\n";
    for (const auto& w : t.warnings) os << "- " << w << "\n";
  }
  return os.str();
}

// ------------------------------------------------------------ CSV

const char* const kTrajectoryCsvHeader =
    "run_id,optimizer,landscape,profile,alpha,seed,generation,step_size,mean_norm,"
    "max_raw,max_noisy,max_clean,mean_clean";
const char* const kSummaryCsvHeader = "optimizer,profile,alpha,n,mean_normalized,sem,mean_runtime_s";

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void export_trajectory_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::IoError, "cannot write " + path.string());
  os << kTrajectoryCsvHeader << "\r\n";
  for (const auto& r : records) {
    for (std::size_t g = 0; g < r.generations.size(); ++g) {
      const auto& gr = r.generations[g];
      auto mx = [](const std::vector<double>& v) { return v.empty() ? kNaN : *std::max_element(v.begin(), v.end()); };
      const double mc = gr.clean.empty() ? kNaN : mean(gr.clean);
      os << csv_escape(r.run_id) << ',' << csv_escape(r.optimizer) << ',' << csv_escape(r.landscape) << ','
         << csv_escape(r.profile) << ',' << format_double(r.alpha) << ',' << r.seed << ',' << g << ','
         << format_double(gr.step_size) << ',' << format_double(gr.mean.norm()) << ',' << format_double(mx(gr.raw))
         << ',' << format_double(mx(gr.noisy)) << ',' << format_double(mx(gr.clean)) << ',' << format_double(mc)
         << "\r\n";
    }
  }
  if (!os) throw Error(Errc::IoError, "write failed for " + path.string());
}

void export_summary_csv(const SummaryTable& t, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::IoError, "cannot write " + path.string());
  os << kSummaryCsvHeader << "\r\n";
  for (const auto* v : {&t.cells, &t.pooled})
    for (const auto& c : *v)
      os << csv_escape(c.optimizer) << ',' << csv_escape(c.profile) << ',' << format_double(c.alpha) << ',' << c.n
         << ',' << format_double(c.mean) << ',' << format_double(c.sem) << ',' << format_double(c.mean_runtime_s)
         << "\r\n";
  if (!os) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace evo
