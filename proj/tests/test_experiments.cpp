#include <catch_amalgamated.hpp>

#include <set>

#include "hproj/errors.hpp"
#include "hproj/experiments.hpp"

using namespace hproj;

TEST_CASE("registry names and anchors") {
  std::set<std::string> names;
  for (const auto& e : experiment_registry()) {
    CHECK(!e.anchor.empty());
    CHECK(!e.description.empty());
    names.insert(e.name);
  }
  CHECK(names.size() == experiment_registry().size());
  for (const char* n : {"topalov-conservation", "tanno-residual", "weighted-invariance", "main-equation"})
    CHECK(names.count(n) == 1);
  CHECK_THROWS_AS(find_experiment("missing"), ConfigError);
}

TEST_CASE("config parsing and validation") {
  RunConfig d = parse_config(Json::object());
  CHECK(d.model.n == 2);
  CHECK(d.experiments.size() == experiment_registry().size());
  CHECK(d.model.beltrami(2, 2) == std::complex<double>(3.0, 0.0));
  CHECK(d.model.generator(0, 0) == std::complex<double>(1.0, 0.0));

  RunConfig c = parse_config(Json::parse(R"({
    "seed": 5, "out_dir": "x",
    "model": {"n": 1, "c": 2.0, "beltrami": {"real": [[1, 0], [0, 2]], "imag": [[0, 1], [0, 0]]}},
    "experiments": ["main-equation", {"name": "kahler-sanity", "points": 3, "tolerances": {"bianchi": 1e-6}}]
  })"));
  CHECK(c.seed == 5);
  CHECK(c.model.n == 1);
  CHECK(c.model.beltrami(0, 1) == std::complex<double>(0.0, 1.0));
  REQUIRE(c.experiments.size() == 2);
  CHECK(c.experiments[1].options.at("points") == 3);
  CHECK(!c.experiments[1].options.contains("name"));

  for (const char* bad : {R"([])", R"({"experiments": ["nope"]})", R"({"model": {"n": 0}})",
                          R"({"model": {"c": -1}})", R"({"model": {"beltrami": {"diag": [1, 2]}}})",
                          R"({"model": {"beltrami": {"diag": [0, 1, 1]}}})", R"({"seed": "x"})",
                          R"({"extra": 1})", R"({"experiments": "some"})",
                          R"({"experiments": [{"name": "flow-ode", "tolerances": 3}]})"})
    CHECK_THROWS_AS(parse_config(Json::parse(bad)), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 12345.678}) CHECK(std::stod(fmt_num(v)) == v);
  CHECK(fmt_num(1.0) == "1");
  CHECK(fmt_int(-4) == "-4");
}

TEST_CASE("csv quoting") {
  ExperimentResult r;
  r.csv_header = {"a", "b"};
  r.csv_rows = {{"x,y", "say \"hi\""}};
  CHECK(csv_text(r) == "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
}

TEST_CASE("identity Beltrami map gives vanishing residuals") {
  RunConfig c = parse_config(Json::parse(R"({"model": {"beltrami": {"diag": [1, 1, 1]}},
                                            "experiments": [{"name": "main-equation", "points": 10}]})"));
  SuiteResult s = run_suite(c);
  REQUIRE(s.results.size() == 1);
  CHECK(s.all_passed);
  CHECK(s.results[0].metrics.at("invariant.max") < 1e-14);
  CHECK(s.results[0].csv_rows.size() == 10);
}

TEST_CASE("sequential and parallel runs agree byte for byte") {
  RunConfig c = parse_config(Json::parse(R"({"experiments": [{"name": "killing-holomorphic", "points": 12},
                                                          {"name": "tanno-residual", "points": 4}]})"));
  SuiteResult a = run_suite(c);
  c.parallel = true;
  SuiteResult b = run_suite(c);
  REQUIRE(a.results.size() == b.results.size());
  for (size_t k = 0; k < a.results.size(); ++k) CHECK(csv_text(a.results[k]) == csv_text(b.results[k]));
  c.seed += 1;
  CHECK(csv_text(run_suite(c).results[0]) != csv_text(a.results[0]));
}

TEST_CASE("failing tolerance marks the experiment failed") {
  RunConfig c = parse_config(
      Json::parse(R"({"experiments": [{"name": "kahler-sanity", "points": 3, "tolerances": {"nabla_J": 0}}]})"));
  SuiteResult s = run_suite(c);
  CHECK(!s.all_passed);
  CHECK(!s.results[0].passed);
  Json j = summary_json(s, c);
  CHECK(j.at("all_passed") == false);
  CHECK(j.at("experiments")[0].at("anchor") == find_experiment("kahler-sanity").anchor);
}

TEST_CASE("option type errors are config errors") {
  RunConfig c = parse_config(Json::parse(R"({"experiments": [{"name": "kahler-sanity", "points": "many"}]})"));
  CHECK_THROWS_AS(run_suite(c), ConfigError);
}

TEST_CASE("parallel_map keeps order and rethrows") {
  auto v = parallel_map<int>(100, true, [](int k) { return k * k; });
  for (int k = 0; k < 100; ++k) CHECK(v[k] == k * k);
  CHECK_THROWS_AS(parallel_map<int>(10, true,
                                    [](int k) -> int {
                                      if (k == 7) throw InvalidParams("seven");
                                      return k;
                                    }),
                  InvalidParams);
}
