// Copyright 2026 The crowdmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Static SVG trajectory plot. World coordinates are used directly as user
// units with y negated, so the viewBox is the padded scenario bounding box.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "crowdmpc/error.hpp"
#include "crowdmpc/trajectory_log.hpp"
#include "crowdmpc/vec2.hpp"

namespace crowdmpc {

struct PlotBounds {
  double x_min{0.0};
  double x_max{0.0};
  double y_min{0.0};
  double y_max{0.0};
};

struct PlotStyle {
  double margin{0.1};           // fraction of the extent added on each side
  double waypoint_period{2.0};  // s between labelled waypoints
  double line_width{0.04};
};

/// Box around every recorded position, start and goal, widened by `margin`
/// of its extent on each side. Degenerate extents are widened to 1 m.
inline PlotBounds plot_bounds(const TrajectoryLog& log, double margin = 0.1) {
  std::vector<Vec2> pts{log.scenario.robot_origin, log.scenario.robot_goal};
  pts.insert(pts.end(), log.scenario.human_starts.begin(), log.scenario.human_starts.end());
  pts.insert(pts.end(), log.scenario.human_goals.begin(), log.scenario.human_goals.end());
  for (const auto& r : log.records) {
    pts.push_back(r.robot.position);
    pts.insert(pts.end(), r.pedestrians.begin(), r.pedestrians.end());
  }
  PlotBounds b{pts[0].x, pts[0].x, pts[0].y, pts[0].y};
  for (const Vec2& p : pts) {
    b.x_min = std::min(b.x_min, p.x);
    b.x_max = std::max(b.x_max, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.y_max = std::max(b.y_max, p.y);
  }
  auto pad = [margin](double& lo, double& hi) {
    double extent = hi - lo;
    if (extent <= 0.0) {
      lo -= 0.5;
      hi += 0.5;
      extent = 1.0;
    }
    lo -= margin * extent;
    hi += margin * extent;
  };
  pad(b.x_min, b.x_max);
  pad(b.y_min, b.y_max);
  return b;
}

namespace detail {

inline const char* pedestrian_colour(std::size_t i) {
  static const char* palette[] = {"#e07b39", "#3a9d5d", "#8e5ea2", "#c0392b", "#7f8c8d",
                                  "#b7950b", "#16a085", "#d35400", "#2c3e50", "#a93226"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

inline std::string svg_point(const Vec2& p) {
  std::ostringstream os;
  os << p.x << ',' << -p.y;
  return os.str();
}

inline std::string star_points(const Vec2& c, double r_outer) {
  std::ostringstream os;
  for (int i = 0; i < 10; ++i) {
    const double r = (i % 2 == 0) ? r_outer : 0.4 * r_outer;
    const double a = std::numbers::pi / 2.0 + i * std::numbers::pi / 5.0;
    if (i > 0) os << ' ';
    os << svg_point(c + Vec2{r * std::cos(a), r * std::sin(a)});
  }
  return os.str();
}

}  // namespace detail

inline std::string render_svg(const TrajectoryLog& log, const PlotStyle& style = {}) {
  if (log.records.empty()) throw Error("emit_plot: empty trajectory log");
  const PlotBounds b = plot_bounds(log, style.margin);
  const double w = b.x_max - b.x_min;
  const double h = b.y_max - b.y_min;
  const double unit = std::max(w, h) / 60.0;

  std::ostringstream os;
  os.precision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 600.0 * w / std::max(w, h) << "\" height=\""
     << 600.0 * h / std::max(w, h) << "\" viewBox=\"" << b.x_min << ' ' << -b.y_max << ' ' << w << ' ' << h
     << "\">\n";
  os << "  <rect id=\"background\" x=\"" << b.x_min << "\" y=\"" << -b.y_max << "\" width=\"" << w
     << "\" height=\"" << h << "\" fill=\"white\"/>\n";

  const std::size_t n_peds = log.scenario.human_starts.size();
  for (std::size_t i = 0; i < n_peds; ++i) {
    os << "  <polyline class=\"pedestrian\" fill=\"none\" stroke=\"" << detail::pedestrian_colour(i)
       << "\" stroke-width=\"" << style.line_width << "\" points=\"";
    bool first = true;
    for (const auto& r : log.records) {
      if (i >= r.pedestrians.size()) continue;
      os << (first ? "" : " ") << detail::svg_point(r.pedestrians[i]);
      first = false;
    }
    os << "\"/>\n";
  }

  os << "  <polyline class=\"robot\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"" << 1.5 * style.line_width
     << "\" points=\"";
  for (std::size_t k = 0; k < log.records.size(); ++k) {
    os << (k ? " " : "") << detail::svg_point(log.records[k].robot.position);
  }
  os << "\"/>\n";

  os << "  <polygon class=\"goal\" fill=\"#d62728\" points=\"" << detail::star_points(log.scenario.robot_goal, 3 * unit)
     << "\"/>\n";

  // Waypoints every waypoint_period seconds, plus the final record.
  const double tau = log.tau > 0.0 ? log.tau : 1.0;
  const auto every = std::max<long>(1, std::lround(style.waypoint_period / tau));
  for (std::size_t k = 0; k < log.records.size(); ++k) {
    const bool last = k + 1 == log.records.size();
    if (static_cast<long>(k) % every != 0 && !last) continue;
    const auto& r = log.records[k];
    os << "  <g class=\"waypoint\">\n";
    os << "    <circle cx=\"" << r.robot.position.x << "\" cy=\"" << -r.robot.position.y << "\" r=\"" << unit
       << "\" fill=\"#1f4e9c\"/>\n";
    for (std::size_t i = 0; i < r.pedestrians.size(); ++i) {
      os << "    <circle cx=\"" << r.pedestrians[i].x << "\" cy=\"" << -r.pedestrians[i].y << "\" r=\"" << 0.7 * unit
         << "\" fill=\"" << detail::pedestrian_colour(i) << "\"/>\n";
    }
    std::ostringstream label;
    label.setf(std::ios::fixed);
    label.precision(1);
    label << r.time << " s";
    os << "    <text x=\"" << r.robot.position.x + 1.5 * unit << "\" y=\"" << -r.robot.position.y - 1.5 * unit
       << "\" font-size=\"" << 2.5 * unit << "\" font-family=\"sans-serif\">" << label.str() << "</text>\n";
    os << "  </g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void emit_plot(const TrajectoryLog& log, const std::filesystem::path& path, const PlotStyle& style = {}) {
  const std::string svg = render_svg(log, style);
  std::ofstream out(path);
  if (!out) throw Error("emit_plot: cannot write " + path.string());
  out << svg;
  if (!out) throw Error("emit_plot: write failed for " + path.string());
}

}  // namespace crowdmpc
