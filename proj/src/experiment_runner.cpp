#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hproj/errors.hpp"
#include "hproj/experiments.hpp"

namespace hproj {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

bool compare(double v, const std::string& op, double t) {
  if (op == "<") return v < t;
  if (op == "<=") return v <= t;
  if (op == ">") return v > t;
  if (op == ">=") return v >= t;
  if (op == "==") return v == t;
  throw std::logic_error("unknown comparison " + op);
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

Json matrix_json(const MatC& m) {
  Json re = Json::array(), im = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json r = Json::array(), q = Json::array();
    for (int j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      q.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(q);
  }
  return {{"real", re}, {"imag", im}};
}

}  // namespace

ExperimentContext::ExperimentContext(const ModelConfig& m, const Json& options, std::uint64_t seed, bool par,
                                     ExperimentResult& out)
    : model(m), parallel(par), options_(options), seed_(seed), out_(out) {}

double ExperimentContext::tol(const std::string& key, double fallback) const {
  if (options_.contains("tolerances") && options_.at("tolerances").contains(key))
    return options_.at("tolerances").at(key).get<double>();
  return fallback;
}

std::mt19937_64 ExperimentContext::rng(std::uint64_t stream) const {
  return std::mt19937_64(splitmix(seed_ ^ splitmix(stream + 1)));
}

bool ExperimentContext::check(const std::string& name, double value, const std::string& op, double threshold) {
  Check c{name, op, value, threshold, compare(value, op, threshold)};
  out_.checks.push_back(c);
  if (!c.passed) out_.passed = false;
  return c.passed;
}

void ExperimentContext::metric(const std::string& name, double value) { out_.metrics[name] = value; }

void ExperimentContext::quantiles(const std::string& name, std::vector<double> v) {
  if (v.empty()) return;
  std::sort(v.begin(), v.end());
  auto q = [&](double p) { return v[static_cast<size_t>(std::floor(p * (v.size() - 1)))]; };
  metric(name + ".q50", q(0.5));
  metric(name + ".q90", q(0.9));
  metric(name + ".max", v.back());
}

void ExperimentContext::header(std::vector<std::string> cols) { out_.csv_header = std::move(cols); }
void ExperimentContext::row(std::vector<std::string> cells) { out_.csv_rows.push_back(std::move(cells)); }

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_int(long long v) { return std::to_string(v); }

const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry())
    if (e.name == name) return e;
  throw ConfigError("unknown experiment '" + name + "'");
}

MatC parse_matrix(const Json& j, int size) {
  MatC m = MatC::Zero(size, size);
  if (j.is_object() && j.contains("diag")) {
    const Json& d = j.at("diag");
    if (!d.is_array() || static_cast<int>(d.size()) != size)
      throw ConfigError("diag must list " + std::to_string(size) + " entries");
    for (int i = 0; i < size; ++i) m(i, i) = d[i].get<double>();
    return m;
  }
  if (j.is_object() && j.contains("real")) {
    const Json& re = j.at("real");
    const Json* im = j.contains("imag") ? &j.at("imag") : nullptr;
    if (!re.is_array() || static_cast<int>(re.size()) != size)
      throw ConfigError("matrix must have " + std::to_string(size) + " rows");
    for (int i = 0; i < size; ++i) {
      if (!re[i].is_array() || static_cast<int>(re[i].size()) != size) throw ConfigError("matrix row has wrong size");
      for (int k = 0; k < size; ++k)
        m(i, k) = {re[i][k].get<double>(), im ? (*im).at(i).at(k).get<double>() : 0.0};
    }
    return m;
  }
  throw ConfigError("matrix must be {\"diag\": [...]} or {\"real\": [[...]], \"imag\": [[...]]}");
}

RunConfig parse_config(const Json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : j.items())
      if (k != "seed" && k != "out_dir" && k != "parallel" && k != "model" && k != "experiments")
        throw ConfigError("unknown config key '" + k + "'");
    RunConfig c;
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.parallel = j.value("parallel", false);
    Json m = j.value("model", Json::object());
    for (const auto& [k, v] : m.items())
      if (k != "n" && k != "c" && k != "beltrami" && k != "generator" && k != "t0")
        throw ConfigError("unknown model key '" + k + "'");
    c.model.n = m.value("n", 2);
    c.model.c = m.value("c", 1.0);
    c.model.t0 = m.value("t0", 0.7);
    if (c.model.n < 1) throw ConfigError("model.n must be at least 1");
    if (!(c.model.c > 0.0)) throw ConfigError("model.c must be positive");
    const int sz = c.model.n + 1;
    c.model.beltrami = MatC::Zero(sz, sz);
    c.model.generator = MatC::Zero(sz, sz);
    for (int i = 0; i < sz; ++i) c.model.beltrami(i, i) = i + 1.0;
    c.model.generator(0, 0) = 1.0;
    if (m.contains("beltrami")) c.model.beltrami = parse_matrix(m.at("beltrami"), sz);
    if (m.contains("generator")) c.model.generator = parse_matrix(m.at("generator"), sz);
    if (std::abs(c.model.beltrami.determinant()) < 1e-12) throw ConfigError("beltrami matrix must be invertible");

    Json ex = j.value("experiments", Json("all"));
    if (ex.is_string()) {
      if (ex.get<std::string>() != "all") throw ConfigError("experiments must be \"all\" or a list");
      for (const auto& e : experiment_registry()) c.experiments.push_back({e.name, Json::object()});
    } else if (ex.is_array()) {
      for (const auto& e : ex) {
        ExperimentEntry s;
        if (e.is_string()) {
          s.name = e.get<std::string>();
        } else if (e.is_object() && e.contains("name")) {
          s.name = e.at("name").get<std::string>();
          s.options = e;
          s.options.erase("name");
          if (s.options.contains("tolerances") && !s.options.at("tolerances").is_object())
            throw ConfigError("tolerances must be an object");
        } else {
          throw ConfigError("experiment entries must be names or objects with a name");
        }
        find_experiment(s.name);
        c.experiments.push_back(std::move(s));
      }
    } else {
      throw ConfigError("experiments must be \"all\" or a list");
    }
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentResult run_experiment(const ExperimentInfo& info, const RunConfig& cfg, const Json& options) {
  ExperimentResult r;
  r.name = info.name;
  r.anchor = info.anchor;
  r.description = info.description;
  ExperimentContext ctx(cfg.model, options, cfg.seed ^ fnv1a(info.name), cfg.parallel, r);
  try {
    info.run(ctx);
  } catch (const Json::exception& e) {
    throw ConfigError("option error in " + info.name + ": " + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    r.passed = false;
    r.error = e.what();
  }
  return r;
}

SuiteResult run_suite(const RunConfig& cfg, const std::string& only) {
  SuiteResult s;
  if (!only.empty()) find_experiment(only);
  for (const auto& entry : cfg.experiments) {
    if (!only.empty() && entry.name != only) continue;
    s.results.push_back(run_experiment(find_experiment(entry.name), cfg, entry.options));
    s.all_passed = s.all_passed && s.results.back().passed;
  }
  if (!only.empty() && s.results.empty()) {
    s.results.push_back(run_experiment(find_experiment(only), cfg, Json::object()));
    s.all_passed = s.results.back().passed;
  }
  return s;
}

std::string csv_text(const ExperimentResult& r) {
  std::ostringstream o;
  for (size_t k = 0; k < r.csv_header.size(); ++k) o << (k ? "," : "") << csv_cell(r.csv_header[k]);
  o << "\n";
  for (const auto& row : r.csv_rows) {
    for (size_t k = 0; k < row.size(); ++k) o << (k ? "," : "") << csv_cell(row[k]);
    o << "\n";
  }
  return o.str();
}

Json summary_json(const SuiteResult& s, const RunConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["model"] = {{"n", cfg.model.n},
                {"c", cfg.model.c},
                {"t0", cfg.model.t0},
                {"beltrami", matrix_json(cfg.model.beltrami)},
                {"generator", matrix_json(cfg.model.generator)}};
  j["all_passed"] = s.all_passed;
  Json ex = Json::array();
  for (const auto& r : s.results) {
    Json e;
    e["name"] = r.name;
    e["anchor"] = r.anchor;
    e["description"] = r.description;
    e["passed"] = r.passed;
    if (!r.error.empty()) e["error"] = r.error;
    Json checks = Json::array();
    for (const auto& c : r.checks)
      checks.push_back({{"name", c.name}, {"op", c.op}, {"value", c.value}, {"threshold", c.threshold},
                        {"passed", c.passed}});
    e["checks"] = checks;
    e["metrics"] = Json::object();
    for (const auto& [k, v] : r.metrics) e["metrics"][k] = v;
    e["csv"] = r.name + ".csv";
    ex.push_back(e);
  }
  j["experiments"] = ex;
  return j;
}

void write_outputs(const SuiteResult& s, const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  for (const auto& r : s.results) {
    std::ofstream f(fs::path(cfg.out_dir) / (r.name + ".csv"), std::ios::binary);
    f << csv_text(r);
  }
  std::ofstream f(fs::path(cfg.out_dir) / "summary.json", std::ios::binary);
  f << summary_json(s, cfg).dump(2) << "\n";
}

}  // namespace hproj
