#include <chrono>
#include <random>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "homonmr/cli.hpp"
#include "homonmr/sequence.hpp"
#include "json.hpp"

using namespace homonmr;
using namespace homonmr::cli;

namespace {

RunConfig config(std::map<std::string, std::string> kv, std::string_view preset = "cytosine") {
  return make_config({}, kv, preset);
}

std::vector<std::vector<std::string>> csv_cells(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    out.push_back(row);
  }
  return out;
}

}  // namespace

TEST_CASE("key/value parsing") {
  const auto kv = parse_key_values(
      "# comment\n"
      "\n"
      "preset = scaled\n"
      "  j_hz=7.1   # trailing\n"
      "t_j = 70.4ms\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("preset") == "scaled");
  CHECK(kv.at("j_hz") == "7.1");
  CHECK(kv.at("t_j") == "70.4ms");
  CHECK_THROWS_AS(parse_key_values("no equals sign here"), ConfigError);
}

TEST_CASE("config building") {
  const RunConfig c = make_config({{"preset", "cytosine"}, {"j_hz", "5"}},
                                  {{"j_hz", "9"}, {"model", "rotating-exact"}});
  CHECK(c.system.coupling() == doctest::Approx(kTwoPi * 9.0));
  CHECK(c.model == HamiltonianModel::rotating_exact());

  const RunConfig scaled = config({}, "scaled");
  CHECK(scaled.system.larmor(0) == doctest::Approx(kTwoPi * 20e3));

  const RunConfig custom = config({{"larmor1_hz", "1000"}, {"larmor2_hz", "1500"}, {"j_hz", "3"}});
  CHECK(custom.system.delta_omega() == doctest::Approx(kTwoPi * 500.0));

  const RunConfig sw = config({{"sweep.parameter", "t_j"}, {"sweep.start", "69.8ms"},
                               {"sweep.stop", "71ms"}, {"sweep.count", "7"}, {"jobs", "3"}});
  REQUIRE(sw.sweep.has_value());
  CHECK(sw.sweep->count == 7);
  CHECK(sw.sweep->start == doctest::Approx(69.8e-3));
  CHECK(sw.jobs == 3);

  CHECK_THROWS_AS(config({{"colour", "blue"}}), ConfigError);
  CHECK_THROWS(config({{"model", "quantum"}}));
  CHECK_THROWS(config({{"format", "xml"}}));
  CHECK_THROWS(config({{"preset", "water"}}));
}

TEST_CASE("typed parameter accessors") {
  const RunConfig c = config({{"t_j", "70.4 ms"}, {"points", "11"}, {"compensate", "true"}});
  CHECK(c.seconds("t_j", 0.0) == doctest::Approx(70.4e-3));
  CHECK(c.seconds("tau", 1.5) == 1.5);
  CHECK(c.integer("points", 0) == 11);
  CHECK(c.flag("compensate", false));
  CHECK(c.text("f", "all") == "all");
  const RunConfig bad = config({{"points", "eleven"}});
  CHECK_THROWS(bad.integer("points", 0));
}

TEST_CASE("doubles print with round-trip precision") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, k % 20 - 10);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("csv and json carry the same numbers") {
  RunConfig c = config({{"kind", "error3"}, {"t_start", "69.3ms"}, {"t_stop", "70.6ms"},
                        {"points", "9"}});
  const Report r = cmd_distance(c);
  CHECK(r.ok);
  REQUIRE_FALSE(r.tables.empty());
  const auto cells = csv_cells(render_csv(r.tables[0]));
  const auto doc = nlohmann::json::parse(render_json(r));
  const auto& rows = doc["tables"][r.tables[0].name]["rows"];
  REQUIRE(rows.size() + 1 == cells.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) {
      CHECK(rows[i][j].get<double>() == std::stod(cells[i + 1][j]));
    }
  }
}

TEST_CASE("commands are deterministic") {
  const RunConfig c = config({{"f", "f2"}, {"t_j", "70.4ms"}, {"readout_duration", "1s"}});
  CHECK(render_json(cmd_dj(c)) == render_json(cmd_dj(c)));
  const RunConfig p = config({{"sweep.parameter", "t_j"}, {"sweep.start", "69.3ms"},
                              {"sweep.stop", "70.6ms"}, {"sweep.count", "4"}, {"jobs", "4"}});
  RunConfig serial = p;
  serial.jobs = 1;
  CHECK(render_json(cmd_pps(p)) == render_json(cmd_pps(serial)));
}

TEST_CASE("dj summary classifies every function") {
  const Report r = cmd_dj(config({{"f", "all"}, {"t_j", "70.4ms"}, {"readout_duration", "1s"}}));
  const Table* summary = nullptr;
  for (const Table& t : r.tables) {
    if (t.name == "summary") summary = &t;
  }
  REQUIRE(summary != nullptr);
  REQUIRE(summary->rows.size() == 4);
  const auto& cols = summary->columns;
  const size_t k = static_cast<size_t>(std::find(cols.begin(), cols.end(), "classification") - cols.begin());
  REQUIRE(k < cols.size());
  const char* expect[] = {"constant", "constant", "balanced", "balanced"};
  for (size_t i = 0; i < 4; ++i) CHECK(std::get<std::string>(summary->rows[i][k]) == expect[i]);
}

TEST_CASE("dj rejects soft-pulse widths outside the window") {
  CHECK_THROWS_AS(cmd_dj(config({{"tau", "1ms"}})), std::invalid_argument);
}

TEST_CASE("parse and translate commands") {
  const std::string src = "s1: pi/2 y ; s2: pi/2 -y\nboth: delay 1/4J\n";
  const Report p = cmd_parse(config({}), src);
  CHECK(p.text.find("both: delay 1/4J") != std::string::npos);
  const Report t = cmd_translate(config({{"tau", "5.229ms"}}), src);
  CHECK(t.text.find("carrier") != std::string::npos);
  CHECK_THROWS_AS(cmd_parse(config({}), "s1: pi q"), ParseError);
}

TEST_CASE("validate-rwa passes on the scaled preset") {
  const Report r = cmd_validate_rwa(config({}, "scaled"));
  CHECK(r.ok);
}

TEST_CASE("parallel_map keeps index order and propagates errors") {
  const auto v = parallel_map(50, 8, [](int i) {
    std::this_thread::sleep_for(std::chrono::microseconds((50 - i) * 20));
    return i * i;
  });
  REQUIRE(v.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK(v[static_cast<size_t>(i)] == i * i);
  CHECK(parallel_map(0, 4, [](int i) { return i; }).empty());
  CHECK_THROWS_AS(parallel_map(10, 3,
                               [](int i) {
                                 if (i == 7) throw std::runtime_error("seven");
                                 return i;
                               }),
                  std::runtime_error);
}
