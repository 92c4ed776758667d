#pragma once

#include "run_config.hpp"
#include "svg.hpp"
#include "table.hpp"

namespace cli {

// Each runner evaluates the whole sweep and returns the CSV table; the
// caller writes it. Summary lines for the terminal go to `log`.
Table run_harvest(const RunConfig& c, std::vector<std::string>& log);
Table run_purity(const RunConfig& c, std::vector<std::string>& log);
Table run_oracle(const RunConfig& c, std::vector<std::string>& log);
Table run(const RunConfig& c, std::vector<std::string>& log);

// Default plot for a run's CSV.
PlotSpec default_plot(const RunConfig& c);

// True when the configuration draws random numbers.
bool uses_rng(const RunConfig& c);

}  // namespace cli
