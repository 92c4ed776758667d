#include "run_config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw std::invalid_argument("config " + path + ": " + msg);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad(path + "." + it.key(), "unknown key");
}

template <class T>
T take(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) bad(path + "." + key, "missing required key");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(path + "." + key, "wrong type");
  }
}

template <class T>
void take_opt(const json& j, const std::string& key, const std::string& path, T& out) {
  if (j.contains(key)) out = take<T>(j, key, path);
}

Command command_from(const std::string& s, const std::string& path) {
  if (s == "harvest") return Command::Harvest;
  if (s == "purity") return Command::Purity;
  if (s == "oracle") return Command::Oracle;
  bad(path, "expected harvest, purity or oracle");
}

Axis axis_from(const std::string& s, const std::string& path) {
  if (s == "gap") return Axis::Gap;
  if (s == "separation") return Axis::Separation;
  if (s == "ratio") return Axis::Ratio;
  if (s == "lambda") return Axis::Lambda;
  bad(path, "expected gap, separation, ratio or lambda");
}

json detector_to_json(const DetectorConfig& d) {
  json j = {{"potential",
             {{"kind", d.kind}, {"scale", d.scale}, {"probe_mass", d.probe_mass}, {"center", d.center}}},
            {"mode", d.mode},
            {"switching", {{"T", d.T}, {"center_time", d.center_time}}},
            {"lambda", d.lambda}};
  j["gap"] = d.gap ? json(*d.gap) : json(nullptr);
  return j;
}

DetectorConfig detector_from_json(const json& j, const std::string& path) {
  check_keys(j, {"potential", "mode", "switching", "lambda", "gap"}, path);
  DetectorConfig d;
  const json& p = j.contains("potential") ? j.at("potential") : json();
  if (p.is_null()) bad(path + ".potential", "missing required key");
  check_keys(p, {"kind", "scale", "probe_mass", "center"}, path + ".potential");
  d.kind = take<std::string>(p, "kind", path + ".potential");
  if (d.kind != "harmonic" && d.kind != "box") bad(path + ".potential.kind", "expected harmonic or box");
  d.scale = take<double>(p, "scale", path + ".potential");
  take_opt(p, "probe_mass", path + ".potential", d.probe_mass);
  take_opt(p, "center", path + ".potential", d.center);
  d.mode = take<std::array<int, 3>>(j, "mode", path);
  if (j.contains("switching")) {
    const json& s = j.at("switching");
    check_keys(s, {"T", "center_time"}, path + ".switching");
    d.T = take<double>(s, "T", path + ".switching");
    take_opt(s, "center_time", path + ".switching", d.center_time);
  }
  take_opt(j, "lambda", path, d.lambda);
  if (j.contains("gap") && !j.at("gap").is_null()) d.gap = take<double>(j, "gap", path);
  if (!(d.scale > 0)) bad(path + ".potential.scale", "must be positive");
  if (!(d.T > 0)) bad(path + ".switching.T", "must be positive");
  if (!(d.lambda >= 0)) bad(path + ".lambda", "must be >= 0");
  if (d.gap && !(*d.gap > 0)) bad(path + ".gap", "must be positive");
  return d;
}

json quadrature_to_json(const hv_quadrature& q) {
  return {{"rel_tol", q.rel_tol},
          {"abs_tol", q.abs_tol},
          {"max_evaluations", q.max_evaluations},
          {"method", hv_quad_method_name(q.method)},
          {"closed_form_kernel", q.closed_form_kernel != 0},
          {"mc_seed", q.mc_seed},
          {"mc_samples", q.mc_samples}};
}

hv_quadrature quadrature_from_json(const json& j, const std::string& path) {
  check_keys(j, {"rel_tol", "abs_tol", "max_evaluations", "method", "closed_form_kernel", "mc_seed", "mc_samples"},
             path);
  hv_quadrature q;
  hv_quadrature_defaults(&q);
  take_opt(j, "rel_tol", path, q.rel_tol);
  take_opt(j, "abs_tol", path, q.abs_tol);
  take_opt(j, "max_evaluations", path, q.max_evaluations);
  if (j.contains("method")) {
    auto m = take<std::string>(j, "method", path);
    if (m == "adaptive_gk")
      q.method = HV_ADAPTIVE_GK;
    else if (m == "tensor_gl")
      q.method = HV_TENSOR_GL;
    else if (m == "monte_carlo")
      q.method = HV_MONTE_CARLO;
    else
      bad(path + ".method", "expected adaptive_gk, tensor_gl or monte_carlo");
  }
  bool cf = q.closed_form_kernel != 0;
  take_opt(j, "closed_form_kernel", path, cf);
  q.closed_form_kernel = cf;
  take_opt(j, "mc_seed", path, q.mc_seed);
  take_opt(j, "mc_samples", path, q.mc_samples);
  if (!(q.rel_tol > 0)) bad(path + ".rel_tol", "must be positive");
  if (!(q.abs_tol > 0)) bad(path + ".abs_tol", "must be positive");
  if (q.max_evaluations <= 0) bad(path + ".max_evaluations", "must be positive");
  if (q.mc_samples < 16) bad(path + ".mc_samples", "must be >= 16");
  return q;
}

}  // namespace

const char* command_name(Command c) {
  switch (c) {
    case Command::Harvest: return "harvest";
    case Command::Purity: return "purity";
    case Command::Oracle: return "oracle";
  }
  return "?";
}

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::Gap: return "gap";
    case Axis::Separation: return "separation";
    case Axis::Ratio: return "ratio";
    case Axis::Lambda: return "lambda";
  }
  return "?";
}

RunConfig default_config(Command c) {
  RunConfig r;
  r.command = c;
  hv_quadrature_defaults(&r.quadrature);
  switch (c) {
    case Command::Harvest:
      r.label = "harvest";
      r.separations = {5.0};
      r.sweep = {Axis::Gap, 0.1, 8.0, 80, Spacing::Linear};
      r.detector_a.scale = r.detector_b.scale = 0.1;
      r.csv_path = "harvest.csv";
      break;
    case Command::Purity:
      r.label = "purity";
      r.sweep = {Axis::Ratio, 0.1, 10.0, 81, Spacing::Log};
      r.csv_path = "purity.csv";
      break;
    case Command::Oracle:
      r.label = "oracle";
      r.sweep = {Axis::Lambda, 0.01, 1.0, 9, Spacing::Log};
      r.lattice = {{"n_sites", 64},
                   {"spacing", 0.25},
                   {"target_mass", 1.0},
                   {"boundary", "periodic"},
                   {"probes",
                    {{{"gap", 2.0},
                      {"gaussian", {{"center", 4.0}, {"width", 0.3}}},
                      {"lambda", 1.0},
                      {"switching", {{"T", 1.0}, {"center_time", 0.0}}}},
                     {{"gap", 2.0},
                      {"gaussian", {{"center", 6.0}, {"width", 0.3}}},
                      {"lambda", 1.0},
                      {"switching", {{"T", 1.0}, {"center_time", 0.0}}}}}}};
      r.csv_path = "oracle.csv";
      break;
  }
  return r;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["command"] = command_name(c.command);
  j["label"] = c.label;
  j["notes"] = c.notes;
  j["sweep"] = {{"axis", axis_name(c.sweep.axis)},
                {"min", c.sweep.min},
                {"max", c.sweep.max},
                {"points", c.sweep.points},
                {"spacing", c.sweep.spacing == Spacing::Log ? "log" : "linear"}};
  json out = {{"csv", c.csv_path}};
  out["svg"] = c.svg_path ? json(*c.svg_path) : json(nullptr);
  j["output"] = out;
  j["workers"] = c.workers;
  switch (c.command) {
    case Command::Harvest:
      j["detector_a"] = detector_to_json(c.detector_a);
      j["detector_b"] = detector_to_json(c.detector_b);
      j["target"] = {{"mass", c.target_mass}};
      if (c.sweep.axis != Axis::Separation) j["separations"] = c.separations;
      j["direction"] = c.direction;
      j["quadrature"] = quadrature_to_json(c.quadrature);
      break;
    case Command::Purity:
      j["purity"] = {{"mass_ell", c.purity.mass_ell},
                     {"dims", c.purity.dims},
                     {"series_rel_tol", c.purity.series_rel_tol},
                     {"purity_threshold", c.purity.purity_threshold}};
      break;
    case Command::Oracle:
      j["lattice"] = c.lattice;
      j["oracle"] = {{"dt", c.oracle.dt}, {"window", c.oracle.window}, {"include_zero", c.oracle.include_zero}};
      break;
  }
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) bad("", "expected a JSON object");
  Command cmd = command_from(take<std::string>(j, "command", ""), ".command");
  std::set<std::string> keys = {"command", "label", "notes", "sweep", "output", "workers"};
  switch (cmd) {
    case Command::Harvest:
      keys.insert({"detector_a", "detector_b", "target", "separations", "direction", "quadrature"});
      break;
    case Command::Purity:
      keys.insert("purity");
      break;
    case Command::Oracle:
      keys.insert({"lattice", "oracle"});
      break;
  }
  check_keys(j, keys, "");
  RunConfig c = default_config(cmd);
  c.label = command_name(cmd);
  take_opt(j, "label", "", c.label);
  take_opt(j, "notes", "", c.notes);
  take_opt(j, "workers", "", c.workers);
  if (c.workers < 0) bad(".workers", "must be >= 0 (0 = hardware concurrency)");

  const json& s = j.contains("sweep") ? j.at("sweep") : json();
  if (s.is_null()) bad(".sweep", "missing required key");
  check_keys(s, {"axis", "min", "max", "points", "spacing"}, ".sweep");
  c.sweep.axis = axis_from(take<std::string>(s, "axis", ".sweep"), ".sweep.axis");
  c.sweep.min = take<double>(s, "min", ".sweep");
  c.sweep.max = take<double>(s, "max", ".sweep");
  c.sweep.points = take<int>(s, "points", ".sweep");
  auto sp = take<std::string>(s, "spacing", ".sweep");
  if (sp == "linear")
    c.sweep.spacing = Spacing::Linear;
  else if (sp == "log")
    c.sweep.spacing = Spacing::Log;
  else
    bad(".sweep.spacing", "expected linear or log");
  if (c.sweep.points < 2) bad(".sweep.points", "must be >= 2");
  if (!(c.sweep.min < c.sweep.max)) bad(".sweep", "min must be < max");
  if (c.sweep.spacing == Spacing::Log && !(c.sweep.min > 0)) bad(".sweep.min", "log spacing needs min > 0");

  const json& o = j.contains("output") ? j.at("output") : json();
  if (o.is_null()) bad(".output", "missing required key");
  check_keys(o, {"csv", "svg"}, ".output");
  c.csv_path = take<std::string>(o, "csv", ".output");
  if (c.csv_path.empty()) bad(".output.csv", "must not be empty");
  if (o.contains("svg") && !o.at("svg").is_null()) c.svg_path = take<std::string>(o, "svg", ".output");

  switch (cmd) {
    case Command::Harvest: {
      if (c.sweep.axis != Axis::Gap && c.sweep.axis != Axis::Separation)
        bad(".sweep.axis", "harvest sweeps gap or separation");
      c.detector_a = detector_from_json(take<json>(j, "detector_a", ""), ".detector_a");
      c.detector_b = detector_from_json(take<json>(j, "detector_b", ""), ".detector_b");
      const json& t = j.contains("target") ? j.at("target") : json();
      if (t.is_null()) bad(".target", "missing required key");
      check_keys(t, {"mass"}, ".target");
      c.target_mass = take<double>(t, "mass", ".target");
      if (!(c.target_mass >= 0)) bad(".target.mass", "must be >= 0");
      if (c.sweep.axis == Axis::Separation) {
        if (j.contains("separations")) bad(".separations", "not allowed for a separation sweep");
        c.separations.clear();
      } else {
        c.separations = take<std::vector<double>>(j, "separations", "");
        if (c.separations.empty()) bad(".separations", "must not be empty");
      }
      take_opt(j, "direction", "", c.direction);
      double n2 = 0.0;
      for (double x : c.direction) n2 += x * x;
      if (std::abs(n2 - 1.0) > 1e-12) bad(".direction", "must be a unit vector");
      if (j.contains("quadrature")) c.quadrature = quadrature_from_json(j.at("quadrature"), ".quadrature");
      break;
    }
    case Command::Purity: {
      if (c.sweep.axis != Axis::Ratio) bad(".sweep.axis", "purity sweeps ratio");
      const json& p = j.contains("purity") ? j.at("purity") : json();
      if (p.is_null()) bad(".purity", "missing required key");
      check_keys(p, {"mass_ell", "dims", "series_rel_tol", "purity_threshold"}, ".purity");
      c.purity.mass_ell = take<double>(p, "mass_ell", ".purity");
      c.purity.dims = take<std::vector<int>>(p, "dims", ".purity");
      take_opt(p, "series_rel_tol", ".purity", c.purity.series_rel_tol);
      take_opt(p, "purity_threshold", ".purity", c.purity.purity_threshold);
      if (c.purity.dims.empty()) bad(".purity.dims", "must not be empty");
      for (int d : c.purity.dims)
        if (d < 1 || d > 3) bad(".purity.dims", "entries must be 1, 2 or 3");
      if (!(c.sweep.min > 0)) bad(".sweep.min", "ratio must be positive");
      break;
    }
    case Command::Oracle: {
      if (c.sweep.axis != Axis::Lambda) bad(".sweep.axis", "oracle sweeps lambda");
      c.lattice = take<json>(j, "lattice", "");
      if (!c.lattice.is_object()) bad(".lattice", "expected an object");
      if (j.contains("oracle")) {
        const json& p = j.at("oracle");
        check_keys(p, {"dt", "window", "include_zero"}, ".oracle");
        take_opt(p, "dt", ".oracle", c.oracle.dt);
        take_opt(p, "window", ".oracle", c.oracle.window);
        take_opt(p, "include_zero", ".oracle", c.oracle.include_zero);
      }
      if (!(c.oracle.dt > 0)) bad(".oracle.dt", "must be positive");
      if (!(c.oracle.window > 0)) bad(".oracle.window", "must be positive");
      if (!(c.sweep.min > 0)) bad(".sweep.min", "lambda grid must be positive (use include_zero)");
      break;
    }
  }
  return c;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return config_to_json(a) == config_to_json(b); }

std::vector<double> sweep_values(const Sweep& s) {
  std::vector<double> v(s.points);
  for (int i = 0; i < s.points; ++i) {
    double t = static_cast<double>(i) / (s.points - 1);
    if (s.spacing == Spacing::Log)
      v[i] = std::exp(std::log(s.min) + t * (std::log(s.max) - std::log(s.min)));
    else
      v[i] = s.min + t * (s.max - s.min);
  }
  v.front() = s.min;
  v.back() = s.max;
  return v;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> n = {"fig1", "fig2", "fig4"};
  return n;
}

RunConfig preset(const std::string& name) {
  if (name == "fig1") {
    RunConfig c = default_config(Command::Harvest);
    c.label = "fig1";
    for (auto* d : {&c.detector_a, &c.detector_b}) {
      d->kind = "harmonic";
      d->scale = 0.1;
      d->mode = {0, 0, 0};
      d->T = 1.0;
      d->lambda = 1.0;
    }
    c.target_mass = 0.0;
    c.separations = {5.0};
    c.sweep = {Axis::Gap, 0.1, 8.0, 80, Spacing::Linear};
    c.csv_path = "fig1.csv";
    c.notes = {"harmonic traps, ground modes, ell = 0.1 T, separation L = 5 T along x, massless target",
               "gaussian switching T = 1, both centred at t = 0, lambda = 1 (negativity in units absorbing lambda^2)",
               "gap Omega swept as an override of the trap frequency; profile normalization uses the swept gap",
               "sweep bounds Omega T in [0.1, 8], 80 points (bounds read off the figure; Omega = 0 excluded)",
               "probe field mass 0"};
    return c;
  }
  if (name == "fig2") {
    RunConfig c = default_config(Command::Harvest);
    c.label = "fig2";
    for (auto* d : {&c.detector_a, &c.detector_b}) {
      d->kind = "box";
      d->scale = 0.5;
      d->mode = {1, 1, 1};
      d->center = {-0.25, -0.25, -0.25};
      d->T = 1.0;
      d->lambda = 1.0;
    }
    c.target_mass = 0.0;
    c.separations = {4.5, 5.0};
    c.sweep = {Axis::Gap, 0.1, 8.0, 80, Spacing::Linear};
    c.csv_path = "fig2.csv";
    c.notes = {"box traps of side d = 0.5 T, lowest mode (1,1,1), cube centres separated by L along x",
               "both L = 4.5 T and L = 5 T are emitted; rows carry the separation column",
               "gaussian switching T = 1, both centred at t = 0, lambda = 1, massless target, probe mass 0",
               "gap Omega swept as an override of the box frequency; profile normalization uses the swept gap",
               "sweep bounds Omega T in [0.1, 8], 80 points (bounds read off the figure)"};
    return c;
  }
  if (name == "fig4") {
    RunConfig c = default_config(Command::Purity);
    c.label = "fig4";
    c.purity.mass_ell = 10.0;
    c.purity.dims = {1, 2, 3};
    c.sweep = {Axis::Ratio, 0.1, 10.0, 81, Spacing::Log};
    c.csv_path = "fig4.csv";
    c.notes = {"m ell = 10, dimensions 1, 2, 3",
               "sigma/ell log-spaced over [0.1, 10], 81 points (bounds read off the figure)",
               "series truncated at relative tail bound 1e-13; 5% purity interval found by bisection"};
    return c;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

const char* config_key_help() {
  return R"(Config file (JSON; unknown keys are rejected; times in units of T, c = hbar = 1):
  command             "harvest" | "purity" | "oracle"                     (required)
  label               free text, written to the CSV header                 (default: command)
  notes               array of strings, written to the CSV header          (default: [])
  workers             worker threads; 0 = hardware concurrency             (default: 1)
  sweep.axis          "gap" | "separation" (harvest), "ratio" (purity),
                      "lambda" (oracle)                                    (required)
  sweep.min/max       range, min < max                                     (required)
  sweep.points        number of points, >= 2                               (required)
  sweep.spacing       "linear" | "log"                                     (required)
  output.csv          CSV path                                             (required)
  output.svg          SVG path or null                                     (default: null)
 harvest:
  detector_a, detector_b:
    potential.kind        "harmonic" | "box"                               (required)
    potential.scale       trap length ell (harmonic) or box side d         (required)
    potential.probe_mass  probe field mass                                 (default: 0)
    potential.center      [x,y,z]; trap centre or box lower corner         (default: [0,0,0])
    mode                  [nx,ny,nz]; harmonic n >= 0, box n >= 1          (required)
    switching.T           gaussian switching width                         (required if switching given)
    switching.center_time                                                  (default: 0)
    lambda                coupling                                         (default: 1)
    gap                   energy gap override or null                      (default: null)
  target.mass         target field mass                                    (required)
  separations         list of L; detector B is shifted from its configured centre by
                      L*direction; forbidden for separation sweeps         (required for gap sweeps)
  direction           unit vector                                          (default: [1,0,0])
  quadrature.rel_tol, abs_tol, max_evaluations, method ("adaptive_gk" | "tensor_gl" |
                      "monte_carlo"), closed_form_kernel, mc_seed, mc_samples
                                                                           (defaults: 1e-10, 1e-300,
                                                                            2000000, adaptive_gk,
                                                                            true, 12345, 4096)
 purity:
  purity.mass_ell         m * ell                                          (required)
  purity.dims             list of dimensions in {1,2,3}                    (required)
  purity.series_rel_tol   series truncation tolerance                      (default: 1e-13)
  purity.purity_threshold interval reported where nu <= 1 + threshold      (default: 0.05)
 oracle:
  lattice             lattice model: n_sites, spacing, target_mass, boundary ("periodic" |
                      "dirichlet"), probes [{gap, profile | gaussian {center,width}, lambda,
                      switching {T, center_time}}], chains [{first_site, potential |
                      harmonic {sites, ell}, probe_mass, lambda, switching}]      (required)
  oracle.dt           RK4 step                                             (default: 0.002)
  oracle.window       integration window in units of T around each switching centre (default: 6)
  oracle.include_zero prepend a lambda = 0 row                             (default: true)
)";
}

}  // namespace cli
