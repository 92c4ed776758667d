#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "run_config.hpp"
#include "runners.hpp"
#include "svg.hpp"
#include "table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch() {
  static fs::path p = [] {
    auto d = fs::temp_directory_path() / ("harvest_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return p;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  fs::path log = scratch() / "cli.log";
  std::string cmd = std::string("cd '") + scratch().string() + "' && '" + HARVEST_CLI_PATH + "' " + args + " > '" +
                    log.string() + "' 2>&1";
  int rc = std::system(cmd.c_str());
  if (out) *out = cli::read_file(log.string());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json load(const std::string& name) { return json::parse(cli::read_file(std::string(CONFIG_DIR) + "/" + name)); }

std::string error_of(const json& j) {
  try {
    cli::config_from_json(j);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config round trip is value-identical") {
  for (auto name : {"harvest_separation.json", "purity_mass_scan.json", "oracle_single.json", "oracle_chain.json"}) {
    auto c = cli::config_from_json(load(name));
    auto back = cli::config_from_json(cli::config_to_json(c));
    CHECK(back == c);
    CHECK(cli::config_to_json(back) == cli::config_to_json(c));
  }
  for (const auto& p : cli::preset_names()) {
    auto c = cli::preset(p);
    CHECK(cli::config_from_json(cli::config_to_json(c)) == c);
  }
}

TEST_CASE("unknown keys are rejected with their path") {
  auto j = load("harvest_separation.json");
  j["detector_a"]["potential"]["radius"] = 1.0;
  CHECK(error_of(j).find("detector_a.potential.radius") != std::string::npos);
  j = load("purity_mass_scan.json");
  j["colour"] = "blue";
  CHECK(error_of(j).find("colour") != std::string::npos);
}

TEST_CASE("sweep validation") {
  auto j = load("purity_mass_scan.json");
  j["sweep"]["max"] = j["sweep"]["min"];
  CHECK(error_of(j).find("sweep") != std::string::npos);
  j = load("purity_mass_scan.json");
  j["sweep"]["points"] = 1;
  CHECK_FALSE(error_of(j).empty());
  j = load("purity_mass_scan.json");
  j["sweep"]["min"] = -1.0;
  CHECK_FALSE(error_of(j).empty());
  j = load("harvest_separation.json");
  j.erase("target");
  CHECK(error_of(j).find("target") != std::string::npos);
  j = load("harvest_separation.json");
  j["detector_a"]["mode"] = json::array({0, 0});
  CHECK_FALSE(error_of(j).empty());
}

TEST_CASE("sweep values") {
  cli::Sweep s;
  s.min = 0.0;
  s.max = 8.0;
  s.points = 5;
  auto v = cli::sweep_values(s);
  REQUIRE(v.size() == 5);
  CHECK(v.front() == 0.0);
  CHECK(v.back() == 8.0);
  CHECK(v[2] == 4.0);
  s.min = 0.1;
  s.max = 10.0;
  s.spacing = cli::Spacing::Log;
  s.points = 3;
  v = cli::sweep_values(s);
  CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(v[2] == 10.0);
}

TEST_CASE("CSV formatting and parsing") {
  CHECK(cli::fmt(0.1) == "1.0000000000000001e-01");
  CHECK(std::stod(cli::fmt(M_PI)) == M_PI);
  cli::Table t;
  t.header_comments = {"hello"};
  t.columns = {"x", "y"};
  t.rows = {{"1", "2"}, {"3", "4"}};
  t.footer_comments = {"fit slope=4"};
  auto text = cli::to_csv(t);
  CHECK(text.rfind("# hello\n", 0) == 0);
  auto back = cli::parse_csv(text);
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(cli::column_index(back, "y") == 1);
  try {
    cli::column_index(back, "z");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("'z'") != std::string::npos);
  }
}

TEST_CASE("SVG output") {
  auto c = cli::preset("fig4");
  c.sweep.points = 9;
  std::vector<std::string> log;
  auto t = cli::run(c, log);
  auto svg = cli::render_svg(t, cli::default_plot(c));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  size_t curves = 0;
  for (size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++curves;
  CHECK(curves == 3);
  CHECK(cli::render_svg(t, cli::default_plot(c)) == svg);

  cli::PlotSpec bad = cli::default_plot(c);
  bad.y = {"negativity"};
  try {
    cli::render_svg(t, bad);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("negativity") != std::string::npos);
  }
}

TEST_CASE("fig1 preset curve from the runner") {
  auto c = cli::preset("fig1");
  std::vector<std::string> log;
  auto t = cli::run(c, log);
  CHECK(t.rows.size() == 80);
  auto col = cli::column_index(t, "negativity");
  CHECK(t.rows.front()[col] == cli::fmt(0.0));
  auto svg = cli::render_svg(t, cli::default_plot(c));
  size_t curves = 0;
  for (size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++curves;
  CHECK(curves == 1);
}

TEST_CASE("purity CSV is symmetric under ratio -> 1/ratio") {
  auto c = cli::preset("fig4");
  c.sweep.points = 11;
  std::vector<std::string> log;
  auto t = cli::run(c, log);
  auto nu = cli::column_index(t, "nu");
  for (size_t d = 0; d < 3; ++d)
    for (int i = 0; i < 11; ++i) {
      double a = std::stod(t.rows[d * 11 + i][nu]), b = std::stod(t.rows[d * 11 + 10 - i][nu]);
      CHECK(std::abs(a - b) < 1e-10);
    }
  CHECK(std::stod(t.rows[5][nu]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("executable: help, presets, exit codes") {
  std::string out;
  CHECK(run_cli("--help", &out) == 0);
  for (auto key : {"sweep.axis", "output.csv", "potential.kind", "separations", "direction", "quadrature.rel_tol",
                   "purity.mass_ell", "purity.dims", "oracle.dt", "lattice", "workers", "notes", "label"})
    CHECK(out.find(key) != std::string::npos);

  CHECK(run_cli("fig4 --points 5 --out fig4.csv --svg") == 0);
  CHECK(fs::exists(scratch() / "fig4.csv"));
  CHECK(fs::exists(scratch() / "fig4.svg"));
  CHECK(run_cli("plot --csv fig4.csv --x sigma_over_ell --y nu --group dim --logx --out p.svg") == 0);
  CHECK(run_cli("plot --csv fig4.csv --x sigma_over_ell --y negativity --out p.svg", &out) != 0);
  CHECK(out.find("negativity") != std::string::npos);

  auto j = load("purity_mass_scan.json");
  j["sweep"]["max"] = j["sweep"]["min"];
  cli::write_file((scratch() / "bad.json").string(), j.dump());
  CHECK(run_cli("purity --config bad.json", &out) == 2);
  CHECK(out.find("sweep") != std::string::npos);
  CHECK(run_cli("harvest --config bad.json") == 2);

  auto mc = load("harvest_separation.json");
  mc["quadrature"]["method"] = "monte_carlo";
  cli::write_file((scratch() / "mc.json").string(), mc.dump());
  CHECK(run_cli("harvest --config mc.json --seedless", &out) == 2);
  CHECK(run_cli("fig1 --seedless --points 4 --out s.csv") == 0);
}

TEST_CASE("executable output is byte-identical across runs") {
  std::string cfg = std::string(CONFIG_DIR) + "/purity_mass_scan.json";
  // Same output name both times; the path is part of the recorded config.
  auto csv = [] { return cli::read_file((scratch() / "a.csv").string()); };
  auto svg = [] { return cli::read_file((scratch() / "a.svg").string()); };
  REQUIRE(run_cli("purity --config '" + cfg + "' --out a.csv") == 0);
  auto first = csv();
  REQUIRE(run_cli("purity --config '" + cfg + "' --out a.csv --workers 3") == 0);
  CHECK(csv() == first);
  REQUIRE(run_cli("fig1 --points 12 --out a.csv --svg") == 0);
  first = csv();
  auto svg1 = svg();
  REQUIRE(run_cli("fig1 --points 12 --out a.csv --svg --workers 2") == 0);
  CHECK(csv() == first);
  CHECK(svg() == svg1);
}
