#include "evo/binio.hpp"
#include "evo/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace evo {

using json = nlohmann::json;

namespace {
constexpr char kMagic[4] = {'E', 'V', 'R', 'R'};
constexpr std::uint32_t kVersion = 1;

void write_doubles(BinaryWriter& w, const std::vector<double>& v) {
  w.u64(v.size());
  for (double x : v) w.f64(x);
}

std::vector<double> read_doubles(BinaryReader& r) {
  const auto n = r.u64();
  if (n > (1u << 24)) throw Error(Errc::CorruptData, "implausible score count");
  std::vector<double> v(n);
  for (auto& x : v) x = r.f64();
  return v;
}
}  // namespace

MeanTrajectory RunRecord::trajectory() const {
  MeanTrajectory t;
  const auto T = static_cast<Eigen::Index>(generations.size());
  t.means.resize(T, dim);
  t.step_sizes.resize(T);
  for (Eigen::Index i = 0; i < T; ++i) {
    t.means.row(i) = generations[i].mean.transpose();
    t.step_sizes[i] = generations[i].step_size;
  }
  return t;
}

Vector RunRecord::evolution_direction() const {
  if (generations.empty()) throw Error(Errc::InsufficientData, "run has no generations");
  return generations.back().mean - initial_mean;
}

void write_record(const std::filesystem::path& path, const RunRecord& rec) {
  json meta{{"fingerprint", rec.fingerprint}, {"run_id", rec.run_id}, {"optimizer", rec.optimizer},
            {"landscape", rec.landscape},     {"profile", rec.profile}, {"alpha", rec.alpha},
            {"seed", std::to_string(rec.seed)}, {"dim", rec.dim},       {"population", rec.population},
            {"runtime_s", rec.runtime_s},     {"final_clean_best", rec.final_clean_best},
            {"evaluations", rec.evaluations}, {"complete", rec.complete}, {"error", rec.error}};
  if (rec.cov) meta["cov"] = {{"kappa", rec.cov->kappa}, {"delta", rec.cov->delta}};

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(Errc::IoError, "cannot write " + tmp.string());
    BinaryWriter w(os);
    w.bytes(kMagic, 4);
    w.u32(kVersion);
    w.str(meta.dump());
    w.vec(rec.initial_mean);
    w.u64(rec.generations.size());
    for (const auto& g : rec.generations) {
      w.vec(g.mean);
      w.f64(g.step_size);
      write_doubles(w, g.raw);
      write_doubles(w, g.noisy);
      write_doubles(w, g.clean);
    }
    os.flush();
    if (!os) throw Error(Errc::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "cannot move record into place: " + ec.message());
}

RunRecord read_record(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::IoError, "cannot open " + path.string());
  BinaryReader r(is);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(Errc::CorruptData, path.string() + " is not a run record");
  if (r.u32() != kVersion) throw Error(Errc::CorruptData, "unsupported record version in " + path.string());
  RunRecord rec;
  try {
    const json meta = json::parse(r.str());
    rec.fingerprint = meta.at("fingerprint");
    rec.run_id = meta.at("run_id");
    rec.optimizer = meta.at("optimizer");
    rec.landscape = meta.at("landscape");
    rec.profile = meta.at("profile");
    rec.alpha = meta.at("alpha");
    rec.seed = std::stoull(meta.at("seed").get<std::string>());
    rec.dim = meta.at("dim");
    rec.population = meta.at("population");
    rec.runtime_s = meta.at("runtime_s");
    rec.final_clean_best = meta.at("final_clean_best");
    rec.evaluations = meta.at("evaluations");
    rec.complete = meta.at("complete");
    rec.error = meta.at("error");
    if (meta.contains("cov")) rec.cov = CovMetrics{meta["cov"].at("kappa"), meta["cov"].at("delta")};
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptData, "bad record metadata in " + path.string() + ": " + e.what());
  }
  rec.initial_mean = r.vec();
  const auto n = r.u64();
  if (n > (1u << 24)) throw Error(Errc::CorruptData, "implausible generation count");
  rec.generations.resize(n);
  for (auto& g : rec.generations) {
    g.mean = r.vec();
    g.step_size = r.f64();
    g.raw = read_doubles(r);
    g.noisy = read_doubles(r);
    g.clean = read_doubles(r);
  }
  return rec;
}

std::vector<RunRecord> load_records(const std::filesystem::path& dir, std::vector<std::string>* warnings) {
  std::filesystem::path root = dir / "records";
  if (!std::filesystem::is_directory(root)) root = dir;
  if (!std::filesystem::is_directory(root)) throw Error(Errc::IoError, "no such directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".evr") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files) {
    try {
      out.push_back(read_record(f));
    } catch (const Error& e) {
      if (warnings) warnings->push_back(e.what());
    }
  }
  return out;
}

RunRecord run_single(Optimizer& opt, Objective& obj, int generations, RunRecord meta) {
  RunRecord rec = std::move(meta);
  rec.dim = opt.dim();
  rec.population = opt.population();
  rec.initial_mean = opt.mean();
  rec.final_clean_best = 0.0;
  rec.evaluations = 0;
  const auto start = std::chrono::steady_clock::now();
  bool any = false;
  try {
    for (int g = 0; g < generations; ++g) {
      const Batch x = opt.ask();
      const std::vector<ScoreRecord> s = obj.evaluate(x, g);
      rec.evaluations += static_cast<long>(x.rows());
      GenerationRecord gr;
      for (const auto& sr : s) {
        gr.raw.push_back(sr.raw);
        gr.noisy.push_back(sr.noisy);
        gr.clean.push_back(sr.clean);
        rec.final_clean_best = any ? std::max(rec.final_clean_best, sr.clean) : sr.clean;
        any = true;
      }
      opt.tell(x, gr.noisy);
      gr.mean = opt.mean();
      gr.step_size = opt.step_size().value_or(std::numeric_limits<double>::quiet_NaN());
      rec.generations.push_back(std::move(gr));
    }
    if (opt.kind() == OptimizerKind::CholeskyCMA || opt.kind() == OptimizerKind::DiagonalCMA)
      rec.cov = isotropy_check(opt);
    rec.complete = true;
  } catch (const Error& e) {
    rec.complete = false;
    rec.error = e.what();
  }
  rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace evo
