#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "thermodiffuse/experiments.hpp"
#include "thermodiffuse/report.hpp"
#include "thermodiffuse/rng.hpp"

using namespace tdiff;
using nlohmann::json;

namespace {

ExperimentReport sample_report() {
  ExperimentReport rep;
  rep.experiment = "demo";
  rep.timestamp = utc_timestamp();
  rep.prng_algorithm = kPrngAlgorithmId;
  rep.config = {{"dim", "4"}, {"label", "with, comma"}};
  rep.metrics = {{"alpha", 1.5}, {"beta", std::nan("")}};
  rep.notes = {"a note with \"quotes\" and, commas"};
  rep.plot_tables.push_back({"curve", {"x", "y"}, {{0.0, 1.0}, {1.0, 2.5}}});
  return rep;
}

std::string out_root() {
  const auto dir = std::filesystem::temp_directory_path() / "tdiff_report_test";
  std::filesystem::remove_all(dir);
  return dir.string();
}

// checks the subset of JSON Schema used by schemas/report.schema.json
void check_against_schema(const json& schema, const json& value);

void check_type(const json& type_spec, const json& value) {
  const auto matches = [&](const std::string& t) {
    if (t == "object") return value.is_object();
    if (t == "array") return value.is_array();
    if (t == "string") return value.is_string();
    if (t == "number") return value.is_number();
    if (t == "null") return value.is_null();
    return false;
  };
  if (type_spec.is_string()) {
    CHECK(matches(type_spec.get<std::string>()));
  } else {
    bool any = false;
    for (const auto& t : type_spec) any = any || matches(t.get<std::string>());
    CHECK(any);
  }
}

void check_against_schema(const json& schema, const json& value) {
  if (schema.contains("type")) check_type(schema["type"], value);
  if (schema.contains("required")) {
    for (const auto& key : schema["required"]) {
      CHECK(value.contains(key.get<std::string>()));
    }
  }
  if (value.is_object()) {
    for (const auto& [key, sub] : value.items()) {
      if (schema.contains("properties") && schema["properties"].contains(key)) {
        check_against_schema(schema["properties"][key], sub);
      } else if (schema.contains("additionalProperties")) {
        if (schema["additionalProperties"].is_boolean()) {
          CHECK(schema["additionalProperties"].get<bool>());
        } else {
          check_against_schema(schema["additionalProperties"], sub);
        }
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    for (const auto& item : value) check_against_schema(schema["items"], item);
  }
}

}  // namespace

TEST_CASE("timestamp format") {
  const std::string ts = utc_timestamp();
  REQUIRE(ts.size() == 16);
  CHECK(ts[8] == 'T');
  CHECK(ts[15] == 'Z');
  for (std::size_t i : {0u, 7u, 9u, 14u}) {
    CHECK(ts[i] >= '0');
    CHECK(ts[i] <= '9');
  }
}

TEST_CASE("csv rendering is a flat section,key,value table") {
  const std::string csv = render_report_csv(sample_report());
  CHECK(csv.rfind("section,key,value\n", 0) == 0);
  CHECK(csv.find("meta,experiment,demo") != std::string::npos);
  CHECK(csv.find("meta,prng_algorithm,philox2x64-10") != std::string::npos);
  CHECK(csv.find("config,dim,4") != std::string::npos);
  CHECK(csv.find("\"with, comma\"") != std::string::npos);
  CHECK(csv.find("metric,alpha,1.5") != std::string::npos);
  CHECK(csv.find("\"\"quotes\"\"") != std::string::npos);  // doubled quotes
}

TEST_CASE("json rendering matches the shipped schema") {
  const json doc = json::parse(render_report_json(sample_report()));
  std::ifstream schema_file(THERMO_SCHEMA_PATH);
  REQUIRE(schema_file.good());
  const json schema = json::parse(schema_file);
  check_against_schema(schema, doc);

  CHECK(doc["experiment"] == "demo");
  CHECK(doc["metrics"]["alpha"] == 1.5);
  CHECK(doc["metrics"]["beta"].is_null());  // NaN becomes null
  CHECK(doc["config"]["label"] == "with, comma");
  CHECK(doc["plot_tables"][0]["name"] == "curve");
  CHECK(doc["plot_tables"][0]["file"] == "plotdata/curve.csv");
}

TEST_CASE("plot table rendering and width validation") {
  const PlotTable table{"curve", {"x", "y"}, {{0.0, 1.0}, {1.0, 2.5}}};
  const std::string csv = render_plot_table_csv(table);
  CHECK(csv.rfind("x,y\n", 0) == 0);
  CHECK(csv.find("1,2.5") != std::string::npos);
  const PlotTable ragged{"bad", {"x", "y"}, {{1.0}}};
  CHECK_THROWS_AS(render_plot_table_csv(ragged), ContractViolation);
}

TEST_CASE("write_report lays out directories and dodges collisions") {
  const std::string root = out_root();
  const ExperimentReport rep = sample_report();
  const std::string dir1 = write_report(rep, root, ReportFormat::kJson);
  CHECK(std::filesystem::exists(dir1 + "/report.json"));
  CHECK(std::filesystem::exists(dir1 + "/plotdata/curve.csv"));
  CHECK(dir1.find(root + "/demo/") == 0);

  const std::string dir2 = write_report(rep, root, ReportFormat::kJson);
  CHECK(dir1 != dir2);  // same timestamp, suffixed directory

  const std::string dir3 = write_report(rep, root, ReportFormat::kCsv);
  CHECK(std::filesystem::exists(dir3 + "/report.csv"));
  CHECK(!std::filesystem::exists(dir3 + "/report.json"));
}

TEST_CASE("experiment metrics are bit-identical across runs") {
  ExperimentAConfig cfg;
  cfg.dim = 12;
  cfg.ranks = {2, 4};
  cfg.n_samples = 8;
  cfg.seeds = {1, 2};
  const ExperimentReport a = run_experiment_a(cfg);
  const ExperimentReport b = run_experiment_a(cfg);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].first == b.metrics[i].first);
    CHECK(a.metrics[i].second == b.metrics[i].second);
  }
  // the config echo carries every knob needed to rerun
  const auto has = [&](const std::string& key) {
    for (const auto& [k, v] : a.config) {
      if (k == key) return true;
    }
    return false;
  };
  for (const char* key : {"dim", "ranks", "n_samples", "seeds", "j2", "kbt", "weight_scale"}) {
    CHECK(has(key));
  }
}

TEST_CASE("parallel and serial sweeps agree exactly") {
  ExperimentAConfig cfg;
  cfg.dim = 10;
  cfg.ranks = {2, 3};
  cfg.n_samples = 6;
  cfg.seeds = {5};
  ExperimentAConfig par = cfg;
  par.parallel = true;
  const ExperimentReport a = run_experiment_a(cfg);
  const ExperimentReport b = run_experiment_a(par);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].second == b.metrics[i].second);
  }
}
