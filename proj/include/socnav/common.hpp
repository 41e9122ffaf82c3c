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

#ifndef SOCNAV_COMMON_HPP_
#define SOCNAV_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace socnav {

// ---------------------------------------------------------------------------
// Error taxonomy. Every failure mode surfaced by the library is one of these;
// the CLI maps Error subclasses to exit code 2 (user/config) or 1 (internal).
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input / file problems.
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Graph / planning problems.
struct NodeOffRoadError : Error { using Error::Error; };
struct EdgeBlockedError : Error { using Error::Error; };
struct NoPathError : Error { using Error::Error; };
struct DegenerateQueryError : Error { using Error::Error; };
struct NoFeasiblePairError : Error { using Error::Error; };
struct NoValidRecoveryError : Error { using Error::Error; };

// Policy / training problems.
struct ShapeMismatchError : Error { using Error::Error; };
struct NonFiniteLossError : Error { using Error::Error; };
struct NonFiniteStateError : Error { using Error::Error; };
struct NonFiniteRatioError : Error { using Error::Error; };
struct DivergedTrainingError : Error { using Error::Error; };
struct MissingCheckpointError : Error { using Error::Error; };
struct VersionMismatchError : Error { using Error::Error; };

// Metric / episode problems.
struct ZeroVectorError : Error { using Error::Error; };
struct DegenerateEpisodeError : Error { using Error::Error; };
struct TooShortError : Error { using Error::Error; };
struct InfeasibleSceneError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// 2D vector in world meters.
// ---------------------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
  bool operator!=(const Vec2& o) const { return !(*this == o); }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }

  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  // CCW rotation by a quarter turn.
  Vec2 perp() const { return {-y, x}; }
  Vec2 rotated(double angle_rad) const {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    return {c * x - s * y, s * x + c * y};
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// ---------------------------------------------------------------------------
// Small math helpers shared across modules.
// ---------------------------------------------------------------------------

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Unsigned angle between two vectors, in [0, pi]. The dot-product ratio is
// clamped before arccos; floating-point products can exceed unit magnitude.
inline double angle_between(const Vec2& a, const Vec2& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw ZeroVectorError("angle_between: zero-length vector");
  }
  // atan2 of |cross| and dot: exact zero for identical directions and far
  // better conditioned near 0 and pi than the acos form.
  return std::atan2(std::abs(a.x * b.y - a.y * b.x), a.dot(b));
}

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }

// FNV-1a, used for config hashes and named seed sub-streams.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace socnav

#endif  // SOCNAV_COMMON_HPP_
