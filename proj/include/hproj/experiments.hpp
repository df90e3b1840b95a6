#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hproj/cpn_models.hpp"

namespace hproj {

using Json = nlohmann::json;

struct ModelConfig {
  int n = 2;
  double c = 1.0;
  MatC beltrami;   // defaults to diag(1, 2, ..., n+1)
  MatC generator;  // defaults to diag(1, 0, ..., 0)
  double t0 = 0.7;
};

struct ExperimentEntry {
  std::string name;
  Json options = Json::object();
};

struct RunConfig {
  ModelConfig model;
  std::vector<ExperimentEntry> experiments;
  std::string out_dir = "hproj_out";
  std::uint64_t seed = 20240607;
  bool parallel = false;
};

struct Check {
  std::string name;
  std::string op;  // "<", ">", "<=", ">=", "=="
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct ExperimentResult {
  std::string name;
  std::string anchor;
  std::string description;
  bool passed = true;
  std::string error;  // set when the experiment threw
  std::vector<Check> checks;
  std::map<std::string, double> metrics;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

class ExperimentContext {
 public:
  ExperimentContext(const ModelConfig& model, const Json& options, std::uint64_t seed, bool parallel,
                    ExperimentResult& out);

  const ModelConfig& model;
  bool parallel;

  template <class T>
  T opt(const std::string& key, const T& fallback) const {
    return options_.contains(key) ? options_.at(key).get<T>() : fallback;
  }
  // tolerance by name, overridable through options.tolerances
  double tol(const std::string& key, double fallback) const;

  // independent stream per work item, identical for sequential and parallel runs
  std::mt19937_64 rng(std::uint64_t stream) const;

  bool check(const std::string& name, double value, const std::string& op, double threshold);
  void metric(const std::string& name, double value);
  // q50, q90 and max of a sample
  void quantiles(const std::string& name, std::vector<double> values);
  void header(std::vector<std::string> cols);
  void row(std::vector<std::string> cells);

 private:
  const Json& options_;
  std::uint64_t seed_;
  ExperimentResult& out_;
};

std::string fmt_num(double v);  // "%.17g"
std::string fmt_int(long long v);

using ExperimentFn = std::function<void(ExperimentContext&)>;

struct ExperimentInfo {
  std::string name;
  std::string anchor;  // the identity under test
  std::string description;
  ExperimentFn run;
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo& find_experiment(const std::string& name);  // throws ConfigError

// Runs fn(0..count-1) and returns the results in index order.
template <class R>
std::vector<R> parallel_map(int count, bool parallel, const std::function<R(int)>& fn);

RunConfig parse_config(const Json& j);          // throws ConfigError
RunConfig load_config(const std::string& path);  // throws ConfigError
MatC parse_matrix(const Json& j, int size);

ExperimentResult run_experiment(const ExperimentInfo& info, const RunConfig& cfg, const Json& options);

struct SuiteResult {
  std::vector<ExperimentResult> results;
  bool all_passed = true;
};
SuiteResult run_suite(const RunConfig& cfg, const std::string& only = "");

std::string csv_text(const ExperimentResult& r);
Json summary_json(const SuiteResult& s, const RunConfig& cfg);
void write_outputs(const SuiteResult& s, const RunConfig& cfg);

template <class R>
std::vector<R> parallel_map(int count, bool parallel, const std::function<R(int)>& fn) {
  std::vector<R> out(count);
  if (!parallel || count < 2) {
    for (int k = 0; k < count; ++k) out[k] = fn(k);
    return out;
  }
  std::vector<std::exception_ptr> errs(count);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int k; (k = next.fetch_add(1)) < count;) {
      try {
        out[k] = fn(k);
      } catch (...) {
        errs[k] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(count, static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace hproj
