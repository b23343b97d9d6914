#include "evo/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace evo {

using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(Errc::ConfigError, msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

json parse_scalar(const std::string& v, int line) {
  if (v.empty()) config_error("line " + std::to_string(line) + ": missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') config_error("line " + std::to_string(line) + ": unterminated string");
    try {
      return json::parse(v);  // TOML basic strings share JSON escapes
    } catch (const json::exception&) {
      config_error("line " + std::to_string(line) + ": bad string " + v);
    }
  }
  if (v == "true") return true;
  if (v == "false") return false;
  std::string num;
  for (char c : v)
    if (c != '_') num += c;
  try {
    std::size_t pos = 0;
    if (num.find_first_of(".eEn") == std::string::npos) {
      const long long i = std::stoll(num, &pos);
      if (pos == num.size()) return i;
    }
    const double d = std::stod(num, &pos);
    if (pos == num.size()) return d;
  } catch (const std::exception&) {
  }
  config_error("line " + std::to_string(line) + ": cannot parse value '" + v + "'");
}

json parse_value(const std::string& v, int line) {
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') config_error("line " + std::to_string(line) + ": arrays must fit on one line");
    json arr = json::array();
    const std::string body = v.substr(1, v.size() - 2);
    std::string cur;
    bool in_str = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      const char c = i < body.size() ? body[i] : ',';
      if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_str = !in_str;
      if (c == ',' && !in_str) {
        const std::string item = trim(cur);
        if (!item.empty()) arr.push_back(parse_scalar(item, line));
        cur.clear();
      } else {
        cur += c;
      }
    }
    return arr;
  }
  return parse_scalar(v, line);
}

double num(const json& j, const std::string& key) {
  if (!j.is_number()) config_error("'" + key + "' must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) config_error("'" + key + "' must be an integer");
  return j.get<int>();
}

std::string kind_of(const std::string& name, const json& params) {
  if (params.is_object() && params.contains("kind")) {
    if (!params["kind"].is_string()) config_error("'kind' must be a string");
    return params["kind"].get<std::string>();
  }
  for (const char* k : {"cholesky", "diagonal", "sphere-exp", "sphere-inv", "ga", "random"})
    if (name.rfind(k, 0) == 0) return k;
  config_error("unknown optimizer '" + name + "'");
}

const std::map<std::string, std::set<std::string>>& allowed_params() {
  static const std::map<std::string, std::set<std::string>> m{
      {"cholesky", {"kind", "sigma0", "a_update_freq", "c1", "cmu", "cc", "cs", "damps"}},
      {"diagonal", {"kind", "sigma0", "boost", "c1", "cmu", "cc", "cs", "damps"}},
      {"sphere-exp", {"kind", "radius", "lr", "cutoff", "mu0", "mu_min", "tau"}},
      {"sphere-inv", {"kind", "radius", "lr", "cutoff", "mu0", "mu_min", "tau"}},
      {"ga", {"kind", "elite", "parent_count", "temperature", "mutation_rate", "mutation_scale"}},
      {"random", {"kind", "sigma0"}},
  };
  return m;
}

}  // namespace

json parse_toml_subset(const std::string& text) {
  json root = json::object();
  json* table = &root;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) config_error("line " + std::to_string(line) + ": bad table header");
      const std::string name = trim(s.substr(1, s.size() - 2));
      if (root.contains(name)) config_error("line " + std::to_string(line) + ": duplicate table [" + name + "]");
      root[name] = json::object();
      table = &root[name];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(line) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    if (key.empty()) config_error("line " + std::to_string(line) + ": empty key");
    if (table->contains(key)) config_error("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    (*table)[key] = parse_value(trim(s.substr(eq + 1)), line);
  }
  return root;
}

void BenchmarkConfig::validate() const {
  if (dim < 1) config_error("dim must be positive");
  if (objective != "quadric" && objective != "noise") config_error("objective must be \"quadric\" or \"noise\"");
  if (objective == "quadric" && dim < 16) config_error("quadric landscapes need dim >= 16");
  if (population < 2) config_error("population must be at least 2");
  if (budget < population || budget % population != 0) config_error("budget must be a positive multiple of population");
  if (repetitions < 1) config_error("repetitions must be >= 1");
  if (landscapes_per_profile < 1) config_error("landscapes_per_profile must be >= 1");
  if (!(baseline_fraction >= 0.0 && baseline_fraction < 1.0)) config_error("baseline_fraction must lie in [0, 1)");
  if (!(optimum_norm >= 0.0)) config_error("optimum_norm must be non-negative");
  if (optimizers.empty()) config_error("at least one optimizer is required");
  if (noise_levels.empty()) config_error("at least one noise level is required");
  for (double a : noise_levels)
    if (!(a >= 0.0)) config_error("noise levels must be non-negative");
  if (objective == "quadric" && profiles.empty()) config_error("at least one landscape profile is required");
  std::set<std::string> seen;
  for (const auto& o : optimizers) {
    if (!seen.insert(o).second) config_error("duplicate optimizer '" + o + "'");
    const auto it = optimizer_params.find(o);
    const json params = it == optimizer_params.end() ? json::object() : it->second;
    const std::string kind = kind_of(o, params);
    const auto allowed = allowed_params().find(kind);
    if (allowed == allowed_params().end()) config_error("unknown optimizer kind '" + kind + "'");
    for (const auto& [k, v] : params.items())
      if (!allowed->second.count(k)) config_error("unknown parameter '" + k + "' for optimizer '" + o + "'");
  }
}

json BenchmarkConfig::to_json() const {
  json j;
  j["dim"] = dim;
  j["budget"] = budget;
  j["population"] = population;
  j["optimizers"] = optimizers;
  j["objective"] = objective;
  json prof = json::array();
  for (auto p : profiles) prof.push_back(profile_name(p));
  j["landscape"] = {{"profiles", prof}, {"per_profile", landscapes_per_profile}, {"baseline_fraction", baseline_fraction},
                    {"optimum_norm", optimum_norm}};
  j["noise"] = noise_levels;
  j["repetitions"] = repetitions;
  j["seed"] = seed;
  j["output"] = output_dir;
  for (const auto& [name, params] : optimizer_params) j[name] = params;
  return j;
}

BenchmarkConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("configuration must be a table");
  BenchmarkConfig c;
  c.optimizers.clear();
  bool have_optimizers = false;
  for (const auto& [key, v] : j.items()) {
    if (key == "dim") c.dim = integer(v, key);
    else if (key == "budget") c.budget = integer(v, key);
    else if (key == "population") c.population = integer(v, key);
    else if (key == "repetitions") c.repetitions = integer(v, key);
    else if (key == "seed") {
      if (!v.is_number_integer() || v.get<long long>() < 0) config_error("'seed' must be a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "output") {
      if (!v.is_string()) config_error("'output' must be a string");
      c.output_dir = v.get<std::string>();
    } else if (key == "objective") {
      if (!v.is_string()) config_error("'objective' must be a string");
      c.objective = v.get<std::string>();
    } else if (key == "noise") {
      if (!v.is_array()) config_error("'noise' must be an array");
      c.noise_levels.clear();
      for (const auto& a : v) c.noise_levels.push_back(num(a, "noise"));
    } else if (key == "optimizers") {
      if (!v.is_array()) config_error("'optimizers' must be an array");
      have_optimizers = true;
      for (const auto& o : v) {
        if (!o.is_string()) config_error("optimizer names must be strings");
        c.optimizers.push_back(o.get<std::string>());
      }
    } else if (key == "landscape") {
      if (!v.is_object()) config_error("[landscape] must be a table");
      for (const auto& [lk, lv] : v.items()) {
        if (lk == "profiles") {
          if (!lv.is_array()) config_error("'profiles' must be an array");
          c.profiles.clear();
          for (const auto& p : lv) {
            if (!p.is_string()) config_error("profile names must be strings");
            c.profiles.push_back(parse_profile(p.get<std::string>()));
          }
        } else if (lk == "per_profile") {
          c.landscapes_per_profile = integer(lv, lk);
        } else if (lk == "baseline_fraction") {
          c.baseline_fraction = num(lv, lk);
        } else if (lk == "optimum_norm") {
          c.optimum_norm = num(lv, lk);
        } else {
          config_error("unknown key '" + lk + "' in [landscape]");
        }
      }
    } else if (v.is_object()) {
      c.optimizer_params[key] = v;
    } else {
      config_error("unknown key '" + key + "'");
    }
  }
  if (!have_optimizers) c.optimizers = BenchmarkConfig{}.optimizers;
  for (const auto& [name, params] : c.optimizer_params)
    if (std::find(c.optimizers.begin(), c.optimizers.end(), name) == c.optimizers.end())
      config_error("table [" + name + "] does not match any listed optimizer");
  c.validate();
  c.fingerprint = config_fingerprint(c);
  return c;
}

BenchmarkConfig parse_config(const std::string& text, bool is_json) {
  json j;
  if (is_json) {
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      config_error(std::string("invalid JSON: ") + e.what());
    }
  } else {
    j = parse_toml_subset(text);
  }
  return config_from_json(j);
}

BenchmarkConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) config_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool is_json = path.extension() == ".json" || (first != std::string::npos && text[first] == '{');
  return parse_config(text, is_json);
}

std::string config_fingerprint(const BenchmarkConfig& cfg) {
  json j = cfg.to_json();
  j.erase("output");  // where results go does not change what they are
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(j.dump())));
  return buf;
}

std::unique_ptr<Optimizer> make_optimizer(const BenchmarkConfig& cfg, const std::string& name, std::uint64_t seed) {
  const auto it = cfg.optimizer_params.find(name);
  const json p = it == cfg.optimizer_params.end() ? json::object() : it->second;
  const std::string kind = kind_of(name, p);
  auto opt_num = [&](const char* k) -> std::optional<double> {
    if (!p.contains(k)) return std::nullopt;
    return num(p[k], k);
  };
  const int d = cfg.dim;
  const int B = cfg.population;
  if (kind == "cholesky") {
    CholeskyConfig c;
    c.dim = d;
    c.population = B;
    c.sigma0 = opt_num("sigma0").value_or(3.0);
    if (p.contains("a_update_freq")) c.a_update_freq = integer(p["a_update_freq"], "a_update_freq");
    c.c1 = opt_num("c1");
    c.cmu = opt_num("cmu");
    c.cc = opt_num("cc");
    c.cs = opt_num("cs");
    c.damps = opt_num("damps");
    return std::make_unique<CholeskyCMA>(c, seed);
  }
  if (kind == "diagonal") {
    DiagonalConfig c;
    c.dim = d;
    c.population = B;
    c.sigma0 = opt_num("sigma0").value_or(3.0);
    c.boost = opt_num("boost");
    c.c1 = opt_num("c1");
    c.cmu = opt_num("cmu");
    c.cc = opt_num("cc");
    c.cs = opt_num("cs");
    c.damps = opt_num("damps");
    return std::make_unique<DiagonalCMA>(c, seed);
  }
  if (kind == "sphere-exp" || kind == "sphere-inv") {
    SphereConfig c = SphereConfig::defaults(d, B, cfg.generations(),
                                            kind == "sphere-exp" ? DecayKind::Exponential : DecayKind::Inverse);
    if (auto v = opt_num("radius")) c.params.radius = *v;
    if (auto v = opt_num("lr")) c.params.lr = *v;
    if (p.contains("cutoff")) c.params.cutoff = integer(p["cutoff"], "cutoff");
    if (auto v = opt_num("mu0")) c.decay.mu0 = *v;
    if (auto v = opt_num("mu_min")) c.decay.mu_min = *v;
    if (auto v = opt_num("tau")) c.decay.tau = *v;
    return std::make_unique<SphereCMA>(c, seed);
  }
  if (kind == "ga") {
    GAConfig c;
    c.dim = d;
    c.population = B;
    c.elite = p.contains("elite") ? integer(p["elite"], "elite") : std::max(1, B / 4);
    if (p.contains("parent_count")) c.parent_count = integer(p["parent_count"], "parent_count");
    c.temperature = opt_num("temperature").value_or(c.temperature);
    c.mutation_rate = opt_num("mutation_rate").value_or(c.mutation_rate);
    c.mutation_scale = opt_num("mutation_scale").value_or(c.mutation_scale);
    return std::make_unique<GeneticAlgorithm>(c, seed);
  }
  if (kind == "random") {
    RandomSearchConfig c;
    c.dim = d;
    c.population = B;
    c.sigma0 = opt_num("sigma0").value_or(1.0);
    return std::make_unique<RandomSearch>(c, seed);
  }
  config_error("unknown optimizer kind '" + kind + "'");
}

}  // namespace evo
