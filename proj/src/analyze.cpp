#include "evo/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace evo {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, const char* spec = "%.4g") {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::map<std::string, std::vector<const RunRecord*>> by_optimizer(const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<const RunRecord*>> m;
  for (const auto& r : records)
    if (r.complete && !r.generations.empty()) m[r.optimizer].push_back(&r);
  return m;
}

class CsvSink {
 public:
  CsvSink(const AnalyzeOptions& opt, AnalysisReport& rep, const std::string& name, const std::string& header)
      : rep_(rep) {
    if (opt.out_dir.empty()) return;
    fs::create_directories(opt.out_dir);
    path_ = opt.out_dir / name;
    os_.open(path_, std::ios::binary);
    if (!os_) throw Error(Errc::IoError, "cannot write " + path_.string());
    os_ << header << "\r\n";
  }
  ~CsvSink() {
    if (os_.is_open()) rep_.csv_files.push_back(path_);
  }
  template <class... Ts>
  void row(const Ts&... xs) {
    if (!os_.is_open()) return;
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(xs), first = false), ...);
    os_ << "\r\n";
  }

 private:
  static std::string cell(const std::string& s) { return csv_escape(s); }
  static std::string cell(const char* s) { return csv_escape(s); }
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }

  AnalysisReport& rep_;
  fs::path path_;
  std::ofstream os_;
};

void analysis_pca(const std::vector<RunRecord>& records, const AnalyzeOptions& opt, AnalysisReport& rep,
                  std::ostringstream& md) {
  md << "## PCA of mean trajectories\n\n";
  CsvSink csv(opt, rep, "pca.csv", "optimizer,k,mean_ratio,theory,n_runs");
  CsvSink liss(opt, rep, "lissajous.csv", "optimizer,run_id,generation,pc1,pc2");
  for (const auto& [name, runs] : by_optimizer(records)) {
    const int T = static_cast<int>(runs.front()->generations.size());
    const int K = std::min(8, T - 1);
    std::vector<double> acc(K, 0.0);
    int n = 0;
    for (const auto* r : runs) {
      if (static_cast<int>(r->generations.size()) != T) continue;
      try {
        const PCADecomposition p = pca_mean_trajectory(r->trajectory());
        for (int k = 0; k < K && k < p.ratios.size(); ++k) acc[k] += p.ratios[k];
        ++n;
        if (n == 1 && p.projections.cols() >= 2) {
          const auto pts = lissajous_project(p, 1, 2);
          for (std::size_t t = 0; t < pts.size(); ++t) liss.row(name, r->run_id, t, pts[t].first, pts[t].second);
        }
      } catch (const Error& e) {
        rep.warnings.push_back("pca skipped " + r->run_id + ": " + e.what());
      }
    }
    if (n == 0) continue;
    md << "### " << name << " (" << n << " runs, T=" << T << ")\n\n| k | mean ratio | theory | difference |\n|---|---|---|---|\n";
    for (int k = 0; k < K; ++k) {
      const double m = acc[k] / n;
      const double th = theoretical_expvar(k + 1, T);
      md << "| " << k + 1 << " | " << fmt(m) << " | " << fmt(th) << " | " << fmt(m - th, "%+.3f") << " |\n";
      csv.row(name, k + 1, m, th, n);
    }
    md << "\n";
  }
}

void analysis_cosfit(const std::vector<RunRecord>& records, const AnalyzeOptions& opt, AnalysisReport& rep,
                     std::ostringstream& md) {
  md << "## Cosine fits of PC projections\n\n";
  CsvSink csv(opt, rep, "cosfit.csv", "optimizer,run_id,k,amplitude,omega,phase,r2");
  for (const auto& [name, runs] : by_optimizer(records)) {
    std::vector<double> ratio_sum(8, 0.0);
    std::vector<int> ratio_n(8, 0);
    int good = 0, total = 0;
    for (const auto* r : runs) {
      try {
        const PCADecomposition p = pca_mean_trajectory(r->trajectory());
        const int K = std::min<int>(8, static_cast<int>(p.projections.cols()));
        for (int k = 1; k <= K; ++k) {
          const Vector col = p.projections.col(k - 1);
          const CosineFit f = cosine_fit({col.data(), static_cast<std::size_t>(col.size())}, k);
          csv.row(name, r->run_id, k, f.amplitude, f.omega, f.phase, f.r2);
          ratio_sum[k - 1] += f.omega / (k / 2.0);
          ++ratio_n[k - 1];
          ++total;
          if (f.r2 > 0.8) ++good;
        }
      } catch (const Error& e) {
        rep.warnings.push_back("cosfit skipped " + r->run_id + ": " + e.what());
      }
    }
    if (total == 0) continue;
    md << "### " << name << "\n\nShare of top-8 projections with R^2 > 0.8: " << fmt(double(good) / total) << "\n\n";
    md << "| k | mean omega / (k/2) |\n|---|---|\n";
    for (int k = 0; k < 8; ++k)
      if (ratio_n[k]) md << "| " << k + 1 << " | " << fmt(ratio_sum[k] / ratio_n[k]) << " |\n";
    md << "\n";
  }
}

void analysis_normgrowth(const std::vector<RunRecord>& records, const AnalyzeOptions& opt, AnalysisReport& rep,
                         std::ostringstream& md) {
  md << "## Norm growth of the mean code\n\n| optimizer | runs | mean slope | mean r^2 | min r^2 |\n|---|---|---|---|---|\n";
  CsvSink csv(opt, rep, "normgrowth.csv", "optimizer,run_id,slope,intercept,r2");
  for (const auto& [name, runs] : by_optimizer(records)) {
    std::vector<double> slope, r2;
    for (const auto* r : runs) {
      try {
        const LinearFit f = norm_growth_fit(r->trajectory());
        csv.row(name, r->run_id, f.slope, f.intercept, f.r2);
        slope.push_back(f.slope);
        r2.push_back(f.r2);
      } catch (const Error& e) {
        rep.warnings.push_back("normgrowth skipped " + r->run_id + ": " + e.what());
      }
    }
    if (r2.empty()) continue;
    md << "| " << name << " | " << r2.size() << " | " << fmt(mean(slope)) << " | " << fmt(mean(r2)) << " | "
       << fmt(*std::min_element(r2.begin(), r2.end())) << " |\n";
  }
  md << "\n";
}

void analysis_covmetrics(const std::vector<RunRecord>& records, const AnalyzeOptions& opt, AnalysisReport& rep,
                         std::ostringstream& md) {
  md << "## Covariance metrics at the end of each run\n\n| optimizer | runs | mean kappa | mean Delta |\n|---|---|---|---|\n";
  CsvSink csv(opt, rep, "covmetrics.csv", "optimizer,run_id,kappa,delta");
  bool any = false;
  for (const auto& [name, runs] : by_optimizer(records)) {
    std::vector<double> k, d;
    for (const auto* r : runs)
      if (r->cov) {
        k.push_back(r->cov->kappa);
        d.push_back(r->cov->delta);
        csv.row(name, r->run_id, r->cov->kappa, r->cov->delta);
      }
    if (k.empty()) continue;
    any = true;
    md << "| " << name << " | " << k.size() << " | " << fmt(mean(k), "%.9g") << " | " << fmt(mean(d), "%.3e") << " |\n";
  }
  if (!any) rep.warnings.push_back("covmetrics: no run carries an adapted covariance");
  md << "\n";
}

void analysis_align(const std::vector<RunRecord>& records, const AnalyzeOptions& opt, AnalysisReport& rep,
                    std::ostringstream& md) {
  if (!opt.frame)
    throw Error(Errc::InvalidArgument,
                "eigenframe alignment needs a frame file; pass --frame <file> (format: EIGENFRAME v1 header + binary block)");
  const EigenFrame frame = read_eigenframe(*opt.frame);
  md << "## Eigenframe alignment of evolution directions\n\n";
  md << "| optimizer | directions | cutoff | Pearson r | p | KS D | KS p | shuffle p |\n|---|---|---|---|---|---|---|---|\n";
  CsvSink csv(opt, rep, "align.csv", "optimizer,k,eigenvalue,amplitude");
  for (const auto& [name, runs] : by_optimizer(records)) {
    std::vector<Vector> dirs;
    for (const auto* r : runs)
      if (r->dim == frame.dim()) dirs.push_back(r->evolution_direction());
    if (dirs.empty()) {
      rep.warnings.push_back("align: no " + name + " run matches the frame dimension");
      continue;
    }
    Matrix Z(static_cast<Eigen::Index>(dirs.size()), frame.dim());
    for (std::size_t i = 0; i < dirs.size(); ++i) Z.row(static_cast<Eigen::Index>(i)) = dirs[i].transpose();
    const AlignmentResult a = eigenframe_projection(Z, frame, opt.cutoff);
    Rng rng(derive_seed(0xA11C, {hash_string(name)}));
    const ShuffleControl sc = alignment_shuffle_test(Z, frame, opt.cutoff, opt.shuffles, rng);
    md << "| " << name << " | " << dirs.size() << " | " << a.cutoff << " | " << fmt(a.pearson_r) << " | "
       << fmt(a.pearson_p, "%.3g") << " | " << fmt(a.ks_statistic) << " | " << fmt(a.ks_p, "%.3g") << " | "
       << fmt(sc.p, "%.3g") << " |\n";
    for (int k = 0; k < frame.size(); ++k) csv.row(name, k + 1, frame.eigenvalues[k], a.amplitudes[k]);
  }
  md << "\n";
}

}  // namespace

AnalysisReport analyze(const std::vector<RunRecord>& records, const AnalyzeOptions& opt) {
  AnalysisReport rep;
  std::ostringstream md;
  md << "# Trajectory diagnostics\n\n";
  std::size_t complete = 0;
  for (const auto& r : records) complete += r.complete ? 1 : 0;
  if (complete == 0) {
    rep.warnings.push_back("no completed run records found; the report is empty");
    md << "No completed run records were found.\n";
    rep.markdown = md.str();
    return rep;
  }
  md << complete << " completed runs.\n\n";

  using Fn = std::function<void(const std::vector<RunRecord>&, const AnalyzeOptions&, AnalysisReport&, std::ostringstream&)>;
  const std::map<std::string, Fn> table{{"pca", analysis_pca},
                                        {"cosfit", analysis_cosfit},
                                        {"normgrowth", analysis_normgrowth},
                                        {"covmetrics", analysis_covmetrics},
                                        {"align", analysis_align}};
  for (const auto& name : opt.analyses) {
    const auto it = table.find(name);
    if (it == table.end()) {
      rep.failures[name] = "unknown analysis (choose from pca, cosfit, normgrowth, covmetrics, align)";
      continue;
    }
    std::ostringstream section;
    try {
      it->second(records, opt, rep, section);
      md << section.str();
    } catch (const std::exception& e) {
      rep.failures[name] = e.what();
    }
  }
  if (!rep.failures.empty()) {
    md << "## Failed analyses\n\n";
    for (const auto& [n, msg] : rep.failures) md << "- " << n << ": " << msg << "\n";
    md << "\n";
  }
  if (!rep.warnings.empty()) {
    md << "## Warnings\n\n";
    for (const auto& w : rep.warnings) md << "- " << w << "\n";
  }
  rep.markdown = md.str();
  return rep;
}

}  // namespace evo
