#pragma once

#include <string>
#include <vector>

#include "table.hpp"

namespace cli {

struct PlotSpec {
  std::string x;
  std::vector<std::string> y;
  std::string group;  // optional: one curve per distinct value
  bool logx = false;
  bool logy = false;
  std::string title;
  int width = 720;
  int height = 480;
};

// Standalone SVG 1.1 line plot. Throws on missing columns or when no
// plottable point remains.
std::string render_svg(const Table& t, const PlotSpec& p);

}  // namespace cli
