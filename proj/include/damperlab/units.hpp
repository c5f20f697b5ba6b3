#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace damperlab {

// Analysis quantities are seconds (double). Simulator time is integer picoseconds.
using Seconds = double;
using Picos = std::int64_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double kNs = 1e-9;
inline constexpr double kUs = 1e-6;
inline constexpr double kMs = 1e-3;
inline constexpr double kPs = 1e-12;

inline constexpr Picos kPsPerNs = 1000;
inline constexpr Picos kPsPerUs = 1000000;
inline constexpr Picos kPsPerMs = 1000000000;

inline Picos to_ps(Seconds s) { return static_cast<Picos>(std::llround(s * 1e12)); }
inline Seconds from_ps(Picos p) { return static_cast<double>(p) * 1e-12; }

// floor/ceil division for signed 64/128-bit operands
template <typename T>
constexpr T floor_div(T a, T b) {
  T q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

template <typename T>
constexpr T ceil_div(T a, T b) {
  T q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

inline double pos(double x) { return x > 0 ? x : 0.0; }

}  // namespace damperlab
