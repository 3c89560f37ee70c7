#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "clexp/cli_run.hpp"
#include "clexp/report.hpp"

using namespace clexp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("clexp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  write_file(p, j.dump(2));
  return p;
}

json base_config() {
  return json{
      {"model",
       {{"spinSpace", {{"labels", {"-", "+"}}, {"weights", {1.0, 1.0}}, {"f", {-1, 1}}}},
        {"potential",
         {{"family", "long_range_ising"},
          {"params", {{"J", 1.0}, {"alpha", 0.0}}},
          {"truncationRadius", 6}}}}},
      {"box", {{"d", 1}, {"k", 2}}},
      {"boundary", {{"rule", "constant"}, {"label", "+"}}},
      {"beta", 0.1},
      {"delta", 0.05},
      {"c", 0.1},
      {"C", 0.1},
      {"seed", 7},
      {"cutoffs", {{"maxBonds", 2}, {"maxPairRange", 2}}}};
}

}  // namespace

TEST_CASE("config validation errors carry field paths") {
  auto dir = fresh_dir("validation");
  SUBCASE("alpha outside [0,1) names potential.params.alpha") {
    json cfg = base_config();
    cfg["model"]["potential"]["params"]["alpha"] = 1.5;
    CHECK_THROWS_WITH_AS(parse_config(cfg.dump()), doctest::Contains("potential.params.alpha"),
                         ValidationError);
  }
  SUBCASE("unknown task") {
    json cfg = base_config();
    cfg["tasks"] = {"frobnicate"};
    CHECK_THROWS_WITH_AS(parse_config(cfg.dump()), doctest::Contains("tasks"), ValidationError);
  }
  SUBCASE("missing required fields") {
    CHECK_THROWS_AS(parse_config("{}"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_config("{not json"), doctest::Contains("invalid JSON"),
                         ValidationError);
  }
  SUBCASE("invalid config gives exit code 2") {
    json cfg = base_config();
    cfg["model"]["potential"]["params"]["alpha"] = 1.5;
    auto out = run_experiment(write_config(dir, cfg), dir / "out", std::nullopt, 1);
    CHECK(out.exit_code == kExitValidation);
  }
}

TEST_CASE("run manifest") {
  SUBCASE("empty task list yields a manifest with zero tasks") {
    auto dir = fresh_dir("empty");
    json cfg = base_config();
    cfg["tasks"] = json::array();
    auto out = run_experiment(write_config(dir, cfg), dir / "out", std::nullopt, 1);
    CHECK(out.exit_code == kExitOk);
    json manifest = json::parse(read_file(out.manifest));
    CHECK(manifest.at("tasks").size() == 0);
    CHECK(manifest.at("files").size() == 0);
    CHECK(manifest.contains("configHash"));
  }
  SUBCASE("budget refusals are recorded and exit 3") {
    auto dir = fresh_dir("budget");
    json cfg = base_config();
    cfg["box"] = {{"d", 1}, {"k", 3}};
    cfg["budgets"] = {{"enumeration", 16}};
    cfg["tasks"] = {"verify-expansion"};
    auto out = run_experiment(write_config(dir, cfg), dir / "out", std::nullopt, 1);
    CHECK(out.exit_code == kExitBudget);
    json manifest = json::parse(read_file(out.manifest));
    CHECK(manifest.at("tasks")[0].at("status") == "budget-refused");
    const std::string err = manifest.at("tasks")[0].at("error");
    CHECK(err.find("budget") != std::string::npos);
  }
}

TEST_CASE("determinism: identical config and seed give byte-identical outputs") {
  auto dir = fresh_dir("determinism");
  json cfg = base_config();
  cfg["tasks"] = {"bounds", "verify-expansion", "mc", "decimate"};
  cfg["mc"] = {{"sweeps", 4000}, {"burnIn", 200}, {"thinning", 2}};
  cfg["r0"] = 2;
  cfg["t"] = 0.4;
  const auto config_path = write_config(dir, cfg);

  auto a = run_experiment(config_path, dir / "a", std::nullopt, 1);
  auto b = run_experiment(config_path, dir / "b", std::nullopt, 1);
  REQUIRE(a.exit_code == kExitOk);
  REQUIRE(b.exit_code == kExitOk);

  json ma = json::parse(read_file(a.manifest));
  json mb = json::parse(read_file(b.manifest));
  REQUIRE(ma.at("files").size() > 0);
  REQUIRE(ma.at("files").size() == mb.at("files").size());
  for (std::size_t i = 0; i < ma.at("files").size(); ++i) {
    const std::string name = ma.at("files")[i].at("path");
    CHECK(ma.at("files")[i].at("digest") == mb.at("files")[i].at("digest"));
    CHECK(read_file(dir / "a" / name) == read_file(dir / "b" / name));
  }
  ma.erase("startedAt");
  ma.erase("finishedAt");
  mb.erase("startedAt");
  mb.erase("finishedAt");
  CHECK(ma == mb);

  SUBCASE("a different seed changes the mc stream") {
    auto c = run_experiment(config_path, dir / "c", 12345, 1);
    REQUIRE(c.exit_code == kExitOk);
    CHECK(read_file(dir / "a" / "mc_series.csv") != read_file(dir / "c" / "mc_series.csv"));
  }
}

TEST_CASE("charfn task") {
  SUBCASE("violation against an inflated override exits 4") {
    auto dir = fresh_dir("violation");
    json cfg = base_config();
    cfg["delta"] = 0.4;
    cfg["charfn"] = {{"regime", "quadratic"}, {"constantOverride", 50.0}};
    cfg["tasks"] = {"charfn"};
    auto out = run_experiment(write_config(dir, cfg), dir / "out", std::nullopt, 1);
    CHECK(out.exit_code == kExitViolation);
    json rep = json::parse(read_file(dir / "out" / "charfn_report.json"));
    CHECK_FALSE(rep.at("allHold").get<bool>());
    CHECK(rep.at("worstMargin").get<double>() < 0.0);
  }
  SUBCASE("honest constants hold and exit 0") {
    auto dir = fresh_dir("charfn_ok");
    json cfg = base_config();
    cfg["beta"] = 1e-4;
    cfg["tasks"] = {"charfn"};
    auto out = run_experiment(write_config(dir, cfg), dir / "out", std::nullopt, 1);
    CHECK(out.exit_code == kExitOk);
    json rep = json::parse(read_file(dir / "out" / "charfn_report.json"));
    CHECK(rep.at("allHold").get<bool>());
  }
  SUBCASE("non-positive constants are refused as validation") {
    auto dir = fresh_dir("charfn_refuse");
    json cfg = base_config();
    cfg["beta"] = 0.3;
    cfg["tasks"] = {"charfn"};
    auto out = run_experiment(write_config(dir, cfg), dir / "out", std::nullopt, 1);
    CHECK(out.exit_code == kExitValidation);
  }
}

TEST_CASE("thread count does not change outputs") {
  auto dir = fresh_dir("threads");
  json cfg = base_config();
  cfg["boxes"] = {1, 2, 3};
  cfg["integral"] = {{"B", 0.8}, {"delta", 1.2}};
  cfg["tasks"] = {"lclt"};
  const auto config_path = write_config(dir, cfg);
  auto serial = run_experiment(config_path, dir / "serial", std::nullopt, 1);
  auto parallel = run_experiment(config_path, dir / "parallel", std::nullopt, 3);
  REQUIRE(serial.exit_code == kExitOk);
  REQUIRE(parallel.exit_code == kExitOk);
  for (const char* name : {"lclt_table.csv", "iclt_table.csv", "integral_decomposition.csv",
                           "lclt_report.json"})
    CHECK(read_file(dir / "serial" / name) == read_file(dir / "parallel" / name));
}

TEST_CASE("lclt task falls back to monte carlo beyond the enumeration budget") {
  auto dir = fresh_dir("lclt_mc");
  json cfg = base_config();
  cfg["boxes"] = {1, 2};
  cfg["budgets"] = {{"enumeration", 16}};  // k=2 has 2^5 = 32 states
  cfg["mc"] = {{"sweeps", 30000}, {"burnIn", 2000}, {"thinning", 3}};
  cfg["integral"] = {{"B", 0.5}, {"delta", 1.0}};
  cfg["tasks"] = {"lclt"};
  auto out = run_experiment(write_config(dir, cfg), dir / "out", std::nullopt, 1);
  REQUIRE(out.exit_code == kExitOk);
  json rep = json::parse(read_file(dir / "out" / "lclt_report.json"));
  CHECK(rep.at("lclt")[0].at("method") == "exact");  // k=1: 8 states fit the budget
  bool saw_mc = false, saw_radius = false;
  for (const auto& row : rep.at("lclt")) {
    if (row.at("method") == "mc") {
      saw_mc = true;
      saw_radius = saw_radius || row.at("supConfRadius").get<double>() > 0.0;
    }
  }
  CHECK(saw_mc);
  CHECK(saw_radius);
}

TEST_CASE("emit-plot-data") {
  auto dir = fresh_dir("emit");
  json cfg = base_config();
  cfg["boxes"] = {1, 2};
  cfg["integral"] = {{"B", 0.8}, {"delta", 1.2}};
  cfg["tasks"] = {"lclt"};
  auto out = run_experiment(write_config(dir, cfg), dir / "out", std::nullopt, 1);
  REQUIRE(out.exit_code == kExitOk);

  SUBCASE("lclt trend CSV") {
    CHECK(emit_plot_data(dir / "out" / "lclt_report.json", "lclt", dir / "plot") == kExitOk);
    const std::string csv = read_file(dir / "plot" / "lclt_trend.csv");
    CHECK(csv.rfind("k,D_k,discrepancy\n", 0) == 0);
    CHECK(csv.find("\r") == std::string::npos);
    CHECK(emit_plot_data(dir / "out" / "lclt_report.json", "lclt", dir / "plot2") == kExitOk);
    CHECK(read_file(dir / "plot2" / "lclt_trend.csv") == csv);
  }
  SUBCASE("unknown kind is rejected") {
    CHECK(emit_plot_data(dir / "out" / "lclt_report.json", "nonsense", dir / "plot") ==
          kExitValidation);
  }
}

TEST_CASE("csv formatting") {
  CsvWriter w({"a", "b"});
  w.add_row({1.0 / 3.0, std::string("x")});
  const std::string s = w.str();
  CHECK(s == "a,b\n0.33333333333333331,x\n");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(w.add_row({std::string("only-one")}), std::invalid_argument);
}
