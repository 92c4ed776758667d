#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "run_config.hpp"
#include "runners.hpp"
#include "svg.hpp"
#include "table.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::string out;
  bool svg = false;
  int points = 0;
  bool seedless = false;
  int workers = -1;
  bool print_config = false;
};

void add_run_flags(CLI::App* sub, RunFlags& f, bool with_config) {
  if (with_config) sub->add_option("--config", f.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "CSV output path (overrides output.csv)");
  sub->add_flag("--svg", f.svg, "also write an SVG plot (output.svg, or the CSV path with .svg)");
  sub->add_option("--points", f.points, "override sweep.points")->check(CLI::Range(2, 1000000));
  sub->add_flag("--seedless", f.seedless, "fail if the run would draw random numbers");
  sub->add_option("--workers", f.workers, "worker threads (overrides workers; 0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("--print-config", f.print_config, "print the resolved configuration as JSON and exit");
}

std::string svg_path_for(const cli::RunConfig& c) {
  if (c.svg_path) return *c.svg_path;
  std::string p = c.csv_path;
  auto dot = p.find_last_of('.');
  auto slash = p.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) p.erase(dot);
  return p + ".svg";
}

int execute(cli::RunConfig c, const RunFlags& f) {
  if (!f.out.empty()) c.csv_path = f.out;
  if (f.points) c.sweep.points = f.points;
  if (f.workers >= 0) c.workers = f.workers;
  if (f.print_config) {
    std::cout << cli::config_to_json(c).dump(2) << "\n";
    return 0;
  }
  // Re-validate after overrides.
  c = cli::config_from_json(cli::config_to_json(c));
  if (f.seedless && cli::uses_rng(c)) {
    std::cerr << "error: --seedless given but quadrature.method is monte_carlo\n";
    return 2;
  }
  std::vector<std::string> log;
  cli::Table t = cli::run(c, log);
  cli::write_file(c.csv_path, cli::to_csv(t));
  for (const auto& l : log) std::cout << l << "\n";
  std::cout << "wrote " << c.csv_path << "\n";
  if (f.svg) {
    std::string p = svg_path_for(c);
    cli::write_file(p, cli::render_svg(t, cli::default_plot(c)));
    std::cout << "wrote " << p << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement harvesting with trapped probe-field modes: sweeps, figure presets, lattice oracle"};
  app.require_subcommand(1);
  app.footer(cli::config_key_help());

  RunFlags rf;
  std::map<std::string, CLI::App*> run_subs;
  for (const char* name : {"harvest", "purity", "oracle"}) {
    auto* s = app.add_subcommand(name, std::string("run a ") + name + " sweep from a JSON config");
    add_run_flags(s, rf, true);
    s->footer(cli::config_key_help());
    run_subs[name] = s;
  }
  std::map<std::string, CLI::App*> presets;
  for (const auto& name : cli::preset_names()) {
    auto* s = app.add_subcommand(name, "figure preset '" + name + "' (parameters listed in the CSV header)");
    add_run_flags(s, rf, false);
    presets[name] = s;
  }

  std::string csv, out, group, title;
  std::string x;
  std::vector<std::string> ys;
  bool logx = false, logy = false;
  auto* plot = app.add_subcommand("plot", "render a CSV column against another as SVG 1.1");
  plot->add_option("--csv", csv, "input CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--x", x, "x column")->required();
  plot->add_option("--y", ys, "y column(s)")->required();
  plot->add_option("--group", group, "column whose distinct values become separate curves");
  plot->add_flag("--logx", logx, "logarithmic x axis");
  plot->add_flag("--logy", logy, "logarithmic y axis");
  plot->add_option("--title", title, "plot title");
  plot->add_option("--out", out, "SVG output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [name, s] : run_subs)
      if (s->parsed()) {
        auto j = nlohmann::json::parse(cli::read_file(rf.config));
        auto c = cli::config_from_json(j);
        if (name != cli::command_name(c.command)) {
          std::cerr << "error: config command '" << cli::command_name(c.command) << "' does not match subcommand '"
                    << name << "'\n";
          return 2;
        }
        return execute(c, rf);
      }
    for (auto& [name, s] : presets)
      if (s->parsed()) return execute(cli::preset(name), rf);
    if (plot->parsed()) {
      cli::PlotSpec p;
      p.x = x;
      p.y = ys;
      p.group = group;
      p.logx = logx;
      p.logy = logy;
      p.title = title;
      auto t = cli::parse_csv(cli::read_file(csv));
      cli::write_file(out, cli::render_svg(t, p));
      std::cout << "wrote " << out << "\n";
      return 0;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
