#pragma once

#include <optional>
#include <string>
#include <vector>

#include "harvest/harvest.h"
#include "json.hpp"

namespace cli {

enum class Command { Harvest, Purity, Oracle };
enum class Axis { Gap, Separation, Ratio, Lambda };
enum class Spacing { Linear, Log };

struct Sweep {
  Axis axis = Axis::Gap;
  double min = 0.0;
  double max = 1.0;
  int points = 2;
  Spacing spacing = Spacing::Linear;
};

struct DetectorConfig {
  std::string kind = "harmonic";
  double scale = 1.0;
  double probe_mass = 0.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  std::array<int, 3> mode{0, 0, 0};
  double T = 1.0;
  double center_time = 0.0;
  double lambda = 1.0;
  std::optional<double> gap;
};

struct PurityConfig {
  double mass_ell = 10.0;
  std::vector<int> dims{1, 2, 3};
  double series_rel_tol = 1e-13;
  double purity_threshold = 0.05;
};

struct OracleConfig {
  double dt = 0.002;
  double window = 6.0;
  bool include_zero = true;
};

struct RunConfig {
  Command command = Command::Harvest;
  std::string label;
  std::vector<std::string> notes;  // provenance lines copied into the CSV header
  // harvest
  DetectorConfig detector_a, detector_b;
  double target_mass = 0.0;
  std::vector<double> separations;  // B sits at its own center + s·direction; not used for separation sweeps
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  hv_quadrature quadrature{};
  // purity
  PurityConfig purity;
  // oracle
  nlohmann::json lattice;
  OracleConfig oracle;

  Sweep sweep;
  std::string csv_path;
  std::optional<std::string> svg_path;
  int workers = 1;
};

RunConfig default_config(Command c);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
bool operator==(const RunConfig& a, const RunConfig& b);

std::vector<double> sweep_values(const Sweep& s);

RunConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();

// Text block documenting every config key, shown by --help.
const char* config_key_help();

const char* command_name(Command c);
const char* axis_name(Axis a);

}  // namespace cli
