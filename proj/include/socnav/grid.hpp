// Copyright 2026 The socnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOCNAV_GRID_HPP_
#define SOCNAV_GRID_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "socnav/common.hpp"

namespace socnav {

enum class CellLabel : std::uint8_t { kTraversable = 0, kNonTraversable = 1 };

// Binary traversability raster with metric resolution. Immutable after
// construction; safe to share across concurrent readers.
struct SemanticGrid {
  int width = 0;   // cells along x
  int height = 0;  // cells along y
  double resolution = 0.0;  // meters per cell
  Vec2 origin;              // world coordinate of the corner of cell (0, 0)
  std::vector<CellLabel> cells;  // row-major, index = y * width + x

  CellLabel at(int x, int y) const { return cells[y * width + x]; }

  bool in_bounds_cell(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }

  bool in_bounds_world(const Vec2& p) const {
    return p.x >= origin.x && p.y >= origin.y &&
           p.x < origin.x + width * resolution &&
           p.y < origin.y + height * resolution;
  }

  // World point -> containing cell. Only meaningful for in-bounds points.
  void world_to_cell(const Vec2& p, int& cx, int& cy) const {
    cx = static_cast<int>(std::floor((p.x - origin.x) / resolution));
    cy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
  }

  Vec2 cell_center(int cx, int cy) const {
    return {origin.x + (cx + 0.5) * resolution,
            origin.y + (cy + 0.5) * resolution};
  }

  std::size_t traversable_count() const {
    std::size_t n = 0;
    for (CellLabel c : cells) n += (c == CellLabel::kTraversable) ? 1 : 0;
    return n;
  }

  double width_m() const { return width * resolution; }
  double height_m() const { return height * resolution; }
};

inline bool is_traversable(const SemanticGrid& grid, const Vec2& p) {
  if (!grid.in_bounds_world(p)) return false;  // off-map is non-traversable
  int cx, cy;
  grid.world_to_cell(p, cx, cy);
  return grid.at(cx, cy) == CellLabel::kTraversable;
}

// ---------------------------------------------------------------------------
// Scenario file I/O.
// Format: JSON with `resolution_m`, `origin_m: [x, y]`, `rows: [string]`.
// Each row character is '.' (traversable) or '#' (non-traversable); row 0 is
// the minimum-y edge.
// ---------------------------------------------------------------------------

inline SemanticGrid grid_from_json(const nlohmann::json& j) {
  SemanticGrid g;
  try {
    g.resolution = j.at("resolution_m").get<double>();
    const auto& o = j.at("origin_m");
    g.origin = {o.at(0).get<double>(), o.at(1).get<double>()};
    const auto& rows = j.at("rows");
    g.height = static_cast<int>(rows.size());
    if (g.height == 0) throw ParseError("scenario: empty rows");
    g.width = static_cast<int>(rows.at(0).get<std::string>().size());
    g.cells.assign(static_cast<std::size_t>(g.width) * g.height,
                   CellLabel::kTraversable);
    for (int y = 0; y < g.height; ++y) {
      const std::string row = rows.at(y).get<std::string>();
      if (static_cast<int>(row.size()) != g.width) {
        throw ParseError("scenario: ragged rows");
      }
      for (int x = 0; x < g.width; ++x) {
        const char c = row[x];
        if (c == '.') {
          g.cells[y * g.width + x] = CellLabel::kTraversable;
        } else if (c == '#') {
          g.cells[y * g.width + x] = CellLabel::kNonTraversable;
        } else {
          throw ParseError(std::string("scenario: invalid cell character '") +
                           c + "'");
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  if (g.width < 1 || g.height < 1) {
    throw ValidationError("scenario: empty grid");
  }
  if (!(g.resolution > 0.0)) {
    throw ValidationError("scenario: resolution must be positive");
  }
  if (g.traversable_count() == 0) {
    throw ValidationError("scenario: no traversable cells");
  }
  return g;
}

inline nlohmann::json grid_to_json(const SemanticGrid& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (int y = 0; y < g.height; ++y) {
    std::string row(g.width, '.');
    for (int x = 0; x < g.width; ++x) {
      if (g.at(x, y) == CellLabel::kNonTraversable) row[x] = '#';
    }
    rows.push_back(row);
  }
  return {{"resolution_m", g.resolution},
          {"origin_m", {g.origin.x, g.origin.y}},
          {"rows", rows}};
}

inline SemanticGrid load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ParseError("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scenario " + path + ": " + e.what());
  }
  return grid_from_json(j);
}

inline void save_scenario(const SemanticGrid& g, const std::string& path) {
  std::ofstream out(path);
  if (!out.good()) throw IoError("cannot write scenario file: " + path);
  out << grid_to_json(g).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Exact Euclidean distance transform.
// ---------------------------------------------------------------------------

// Per-cell Euclidean distance in meters to the nearest non-traversable cell
// center; 0 on non-traversable cells. A grid with no non-traversable cell
// gets the finite sentinel (width + height) * resolution everywhere.
struct DistanceField {
  int width = 0;
  int height = 0;
  double resolution = 0.0;
  Vec2 origin;
  std::vector<double> values;  // meters, row-major

  double at(int x, int y) const { return values[y * width + x]; }

  Vec2 cell_center(int cx, int cy) const {
    return {origin.x + (cx + 0.5) * resolution,
            origin.y + (cy + 0.5) * resolution};
  }
};

namespace detail {

// One-dimensional squared-distance transform (Felzenszwalb & Huttenlocher):
// d[q] = min_p (q - p)^2 + f[p], computed via the lower envelope of the
// parabolas rooted at (p, f[p]). v and z are scratch of size n and n + 1.
inline void squared_dt_1d(const double* f, int n, double* d, int* v,
                          double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    for (;;) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

inline DistanceField distance_transform(const SemanticGrid& grid) {
  DistanceField field;
  field.width = grid.width;
  field.height = grid.height;
  field.resolution = grid.resolution;
  field.origin = grid.origin;
  field.values.assign(grid.cells.size(), 0.0);

  bool any_blocked = false;
  for (CellLabel c : grid.cells) {
    if (c == CellLabel::kNonTraversable) {
      any_blocked = true;
      break;
    }
  }
  if (!any_blocked) {
    const double sentinel = (grid.width + grid.height) * grid.resolution;
    std::fill(field.values.begin(), field.values.end(), sentinel);
    return field;
  }

  // Squared distances in cell units stay exact integers well below 2^53, so
  // the two-pass result matches a brute-force all-pairs minimum bit for bit.
  const double kFar = 1e18;
  const int w = grid.width, h = grid.height;
  std::vector<double> sq(grid.cells.size());
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    sq[i] = (grid.cells[i] == CellLabel::kNonTraversable) ? 0.0 : kFar;
  }

  const int n_max = std::max(w, h);
  std::vector<double> f(n_max), d(n_max), z(n_max + 1);
  std::vector<int> v(n_max);

  // Pass 1: along x within each row.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = sq[y * w + x];
    detail::squared_dt_1d(f.data(), w, d.data(), v.data(), z.data());
    for (int x = 0; x < w; ++x) sq[y * w + x] = d[x];
  }
  // Pass 2: along y within each column.
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = sq[y * w + x];
    detail::squared_dt_1d(f.data(), h, d.data(), v.data(), z.data());
    for (int y = 0; y < h; ++y) sq[y * w + x] = d[y];
  }

  for (std::size_t i = 0; i < sq.size(); ++i) {
    field.values[i] = std::sqrt(sq[i]) * grid.resolution;
  }
  return field;
}

// Bilinear interpolation of the four surrounding cell-center values. Points
// outside the grid bounds read as clearance 0 (off-map is non-traversable);
// inside the half-cell border the interpolation clamps to the outermost
// cell centers.
inline double clearance_at(const DistanceField& field, const Vec2& p) {
  if (p.x < field.origin.x || p.y < field.origin.y ||
      p.x >= field.origin.x + field.width * field.resolution ||
      p.y >= field.origin.y + field.height * field.resolution) {
    return 0.0;
  }
  const double gx = (p.x - field.origin.x) / field.resolution - 0.5;
  const double gy = (p.y - field.origin.y) / field.resolution - 0.5;
  const int ix = std::clamp(static_cast<int>(std::floor(gx)), 0,
                            std::max(field.width - 2, 0));
  const int iy = std::clamp(static_cast<int>(std::floor(gy)), 0,
                            std::max(field.height - 2, 0));
  const double fx = std::clamp(gx - ix, 0.0, 1.0);
  const double fy = std::clamp(gy - iy, 0.0, 1.0);
  const int ix1 = std::min(ix + 1, field.width - 1);
  const int iy1 = std::min(iy + 1, field.height - 1);
  const double v00 = field.at(ix, iy);
  const double v10 = field.at(ix1, iy);
  const double v01 = field.at(ix, iy1);
  const double v11 = field.at(ix1, iy1);
  const double top = v00 * (1.0 - fx) + v10 * fx;
  const double bot = v01 * (1.0 - fx) + v11 * fx;
  return top * (1.0 - fy) + bot * fy;
}

}  // namespace socnav

#endif  // SOCNAV_GRID_HPP_
