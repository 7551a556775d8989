#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fxhhw/error.hpp"
#include "fxhhw/experiment.hpp"

using namespace fxhhw;
using nlohmann::json;

namespace {

ExperimentConfig small_exp2() {
  auto c = builtin_experiment(2);
  c.pricing.grid.s.m = 8;
  c.pricing.grid.v.m = 6;
  c.pricing.grid.rd.m = 5;
  c.pricing.grid.rf.m = 5;
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("fxhhw_test_" + name)).string();
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("configuration echo round-trips") {
  for (int which : {1, 2, 3}) {
    const auto c = builtin_experiment(which);
    const std::string echo = config_to_json(c);
    const auto back = parse_config(echo);
    CHECK(config_to_json(back) == echo);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
  }
  CHECK(config_hash(builtin_experiment(1)) != config_hash(builtin_experiment(2)));
}

TEST_CASE("configuration errors are reported together") {
  json j = json::parse(config_to_json(builtin_experiment(1)));
  j["model"]["kappa"] = -0.5;
  j["grid"]["m"] = {28, 20, 2, 14};
  j["method"] = "spectral";
  const std::string msg = message_of(j.dump());
  CHECK(msg.find("kappa") != std::string::npos);
  CHECK(msg.find("grid.m") != std::string::npos);
  CHECK(msg.find("method") != std::string::npos);

  CHECK(message_of("{ not json").find("not valid JSON") != std::string::npos);
  CHECK(message_of("[1, 2]").find("object") != std::string::npos);
  CHECK(message_of("{}").find("model: missing") != std::string::npos);

  json put = json::parse(config_to_json(builtin_experiment(1)));
  put["option"]["kind"] = "put";
  put["boundary"] = "dirichlet";
  CHECK_FALSE(message_of(put.dump()).empty());

  json dt = json::parse(config_to_json(builtin_experiment(3)));
  dt["delta_tau"] = 0.0007;
  CHECK(message_of(dt.dump()).find("delta_tau") != std::string::npos);
}

TEST_CASE("configuration files") {
  const std::string path = temp_path("cfg.json");
  {
    std::ofstream os(path);
    os << config_to_json(builtin_experiment(3));
  }
  CHECK(config_hash(load_config(path)) == config_hash(builtin_experiment(3)));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config(temp_path("does_not_exist.json")), IoError);
}

TEST_CASE("CSV quoting") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("single run report") {
  auto c = small_exp2();
  c.lambda_max = true;
  SolutionField field;
  const auto r = run_experiment(c, &field);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].m == std::array<int, 4>{8, 6, 5, 5});
  CHECK(r.rows[0].eps1.has_value());
  CHECK(r.rows[0].lambda_max.has_value());
  CHECK(*r.rows[0].lambda_max < 0.0);
  CHECK(r.spectral.has_value());
  CHECK(field.values.size() == 8 * 6 * 5 * 5);

  std::ostringstream os;
  write_report_csv(os, r);
  const std::string csv = os.str();
  CHECK(csv.rfind("config_hash,name,method,solver,boundary,m1,m2,m3,m4,V1,V2,eps1,eps2,roc1,roc2,lambda_max\r\n", 0) == 0);
  CHECK(csv.find(r.config_hash) != std::string::npos);
  CHECK(csv.find("seconds") == std::string::npos);
  CHECK(format_report_table(r).find("V1") != std::string::npos);
}

TEST_CASE("sweeps") {
  const auto c = small_exp2();
  CHECK_THROWS_AS(run_sweep(c, axis_s, {8, 16}), ConfigError);
  CHECK_THROWS_AS(run_sweep(c, axis_s, {8, 8, 16}), ConfigError);
  CHECK_THROWS_AS(run_sweep(c, axis_s, {3, 8, 16}), ConfigError);
  const auto r = run_sweep(c, axis_s, {6, 8, 10});
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[2].m[0] == 10);
  CHECK_FALSE(r.roc1[0].has_value());
  CHECK_FALSE(r.roc1[1].has_value());
  CHECK(axis_from_string("rd") == axis_rd);
  CHECK_THROWS_AS(axis_from_string("x"), ConfigError);
}

TEST_CASE("field persistence and surface export") {
  const auto c = small_exp2();
  SolutionField field;
  run_experiment(c, &field);
  const std::string path = temp_path("field.json");
  save_field(field, path);
  const auto back = load_field(path);
  std::remove(path.c_str());
  CHECK(back.grid.dims() == field.grid.dims());
  CHECK(back.values == field.values);
  CHECK(back.tau == field.tau);
  CHECK(back.anchor == field.anchor);
  for (int a = 0; a < 4; ++a) CHECK(back.grid.nodes[a] == field.grid.nodes[a]);
  CHECK(interpolate(back, c.queries[0]) == interpolate(field, c.queries[0]));
  CHECK_THROWS_AS(field_from_json("{\"format\": \"other\"}"), Error);

  const auto spec = slice_from_string("sv", field.anchor);
  CHECK(spec.axis_x == axis_s);
  CHECK(spec.axis_y == axis_v);
  const auto pts = surface_export(field, spec);
  CHECK(pts.size() == 8 * 6);
  std::stringstream ss;
  write_surface_csv(ss, spec, pts);
  const auto read = read_surface_csv(ss);
  REQUIRE(read.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(read[i].x == pts[i].x);
    CHECK(read[i].y == pts[i].y);
    CHECK(read[i].value == pts[i].value);
  }
  CHECK(surface_export(field, slice_from_string("df", field.anchor)).size() == 25);
  CHECK_THROWS_AS(slice_from_string("ss", field.anchor), Error);
  CHECK_THROWS_AS(slice_from_string("sx", field.anchor), Error);
}

TEST_CASE("output files") {
  auto c = small_exp2();
  c.output.csv = temp_path("out.csv");
  c.output.table = temp_path("out.txt");
  c.output.greeks = temp_path("greeks.csv");
  c.greeks = true;
  SolutionField field;
  const auto r = run_experiment(c, &field);
  write_outputs(c, r, &field);
  for (const auto& p : {c.output.csv, c.output.table, c.output.greeks}) {
    CHECK(std::filesystem::exists(p));
    CHECK(std::filesystem::file_size(p) > 0);
    std::remove(p.c_str());
  }
}
