#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "circuitlab/io/checksum.hpp"
#include "circuitlab/io/config.hpp"
#include "circuitlab/io/csv.hpp"
#include "circuitlab/io/run_output.hpp"
#include "circuitlab/io/scenario.hpp"

using namespace circuitlab;
using namespace circuitlab::io;

namespace fs = std::filesystem;

namespace {

Json small_goodwin() {
  return Json::parse(R"({
    "schema_version": 1,
    "model": "goodwin",
    "parameters": {"a": 0.225, "b": 0.2, "c": 0.4, "d": 0.6, "omega": 0.005,
                   "sigma_s": 0.015, "sigma_lambda": 0.005},
    "initial": [{"s_w": 0.75, "lambda_w": 0.9}],
    "run": {"horizon": 2, "dt": 0.01, "paths": 3, "seed": 42}
  })");
}

const Artifact& find(const RunResult& r, const std::string& name) {
  for (const auto& a : r.files)
    if (a.name == name) return a;
  throw std::runtime_error("missing artifact " + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Csv, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
}

TEST(Csv, RoundTrip) {
  CsvWriter w({"label", "value"});
  w.row_strings({"a,b", "1"}).row_strings({"q\"uote", "2"}).row_strings({"line\r\nbreak", "3"});
  const auto rows = parse_csv(w.str());
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1][0], "a,b");
  EXPECT_EQ(rows[2][0], "q\"uote");
  EXPECT_EQ(rows[3][0], "line\r\nbreak");
  EXPECT_EQ(rows[3][1], "3");
  EXPECT_NE(w.str().find("\r\n"), std::string::npos);
}

TEST(Csv, NumbersRoundTripExactly) {
  const std::vector<double> v{0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0};
  CsvWriter w({"a", "b", "c", "d", "e"});
  w.row(v);
  const auto rows = parse_csv(w.str());
  for (std::size_t j = 0; j < v.size(); ++j) EXPECT_EQ(std::stod(rows[1][j]), v[j]);
}

TEST(Csv, RejectsRaggedRows) {
  CsvWriter w({"a", "b"});
  EXPECT_THROW(w.row({1.0}), ParameterError);
}

TEST(Checksum, KnownVectors) {
  EXPECT_EQ(checksum("abc"), "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(checksum(""), "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Config, UnknownKeyIsNamed) {
  auto c = small_goodwin();
  c["parameters"]["bogus"] = 1;
  try {
    plan_scenario(c);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("parameters.bogus"), std::string::npos);
  }
  c = small_goodwin();
  c["extra"] = true;
  EXPECT_THROW(plan_scenario(c), SchemaError);
}

TEST(Config, SchemaVersionAndModelAreChecked) {
  auto c = small_goodwin();
  c["schema_version"] = 2;
  EXPECT_THROW(plan_scenario(c), SchemaError);
  c = small_goodwin();
  c.erase("schema_version");
  EXPECT_EQ(plan_scenario(c).effective["schema_version"], kSchemaVersion);
  c = small_goodwin();
  c["model"] = "nope";
  EXPECT_THROW(plan_scenario(c), SchemaError);
}

TEST(Config, WrongTypesAreRejected) {
  auto c = small_goodwin();
  c["parameters"]["a"] = "big";
  EXPECT_THROW(plan_scenario(c), SchemaError);
  c = small_goodwin();
  c["run"]["paths"] = -1;
  EXPECT_THROW(plan_scenario(c), SchemaError);
  c = small_goodwin();
  c["initial"] = 3;
  EXPECT_THROW(plan_scenario(c), SchemaError);
  EXPECT_THROW(parse_json("{not json", "inline"), SchemaError);
}

TEST(Config, DefaultsAndOverridesAreRecorded) {
  Overrides o;
  o.seed = 7;
  o.paths = 2;
  const auto plan = plan_scenario(small_goodwin(), o);
  EXPECT_EQ(plan.effective["run"]["seed"], 7);
  EXPECT_EQ(plan.effective["run"]["paths"], 2);
  EXPECT_TRUE(plan.effective["run"].contains("max_records"));
  EXPECT_TRUE(plan.effective["run"].contains("epsilon"));
  EXPECT_TRUE(plan.warnings.empty());
}

TEST(Config, UnusedOverrideWarns) {
  auto c = Json::parse(R"({"schema_version": 1, "model": "ledger",
    "banks": [{"external_assets": 20, "external_liabilities": 15, "equity": 5}],
    "events": [{"kind": "issue_loan_single", "amount": 2}]})");
  Overrides o;
  o.seed = 3;
  const auto plan = plan_scenario(c, o);
  ASSERT_EQ(plan.warnings.size(), 1u);
  EXPECT_NE(plan.warnings[0].find("--seed"), std::string::npos);
}

TEST(Scenario, EffectiveConfigReproducesRun) {
  const auto first = run_scenario(small_goodwin());
  const auto again = run_scenario(first.effective);
  EXPECT_EQ(find(first, "trajectories.csv").content, find(again, "trajectories.csv").content);
  EXPECT_EQ(first.effective, again.effective);
  EXPECT_EQ(first.summary.dump(), again.summary.dump());
}

TEST(Scenario, SvgOnlyWhenRequested) {
  const auto plain = run_scenario(small_goodwin());
  for (const auto& a : plain.files) EXPECT_FALSE(a.name.ends_with(".svg")) << a.name;
  Overrides o;
  o.svg = true;
  const auto with = run_scenario(small_goodwin(), o);
  const auto& svg = find(with, "phase.svg").content;
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Scenario, RuntimeErrorsKeepTheirType) {
  auto c = small_goodwin();
  c["initial"][0]["s_w"] = 1.2;
  EXPECT_THROW(run_scenario(c), DomainError);
}

TEST(RunOutput, ManifestMatchesFilesOnDisk) {
  const auto dir = fs::temp_directory_path() / "circuitlab_io_test";
  fs::remove_all(dir);
  const auto r = run_scenario(small_goodwin());
  const auto m = write_run(dir, r, 0.5);
  EXPECT_EQ(m["model"], "goodwin");
  EXPECT_EQ(m["config_hash"], checksum(r.effective.dump()));
  EXPECT_EQ(m["seed"], 42);
  ASSERT_EQ(m["outputs"].size(), r.files.size() + 2);
  for (const auto& o : m["outputs"]) {
    const auto bytes = slurp(dir / o["file"].get<std::string>());
    EXPECT_EQ(o["bytes"], bytes.size());
    EXPECT_EQ(o["checksum"], checksum(bytes));
  }
  const auto eff = load_json_file((dir / "effective_config.json").string());
  EXPECT_EQ(eff, r.effective);
  fs::remove_all(dir);
}

TEST(Scenarios, ShippedConfigsPlan) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(CIRCUITLAB_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    SCOPED_TRACE(entry.path().filename().string());
    const auto plan = plan_scenario(load_json_file(entry.path().string()));
    EXPECT_TRUE(plan.warnings.empty());
    EXPECT_EQ(plan.effective["schema_version"], kSchemaVersion);
    ++count;
  }
  EXPECT_GE(count, model_names().size());
}
