#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "units.hpp"

namespace damperlab {

enum class DamperVariant { ideal, tolerance, resequencing, head_of_line };
enum class HeaderMode { standard, te_stamping };
enum class Rounding { none, floor, ceil };

inline const char* to_string(DamperVariant v) {
  switch (v) {
    case DamperVariant::ideal: return "ideal";
    case DamperVariant::tolerance: return "tolerance";
    case DamperVariant::resequencing: return "resequencing";
    case DamperVariant::head_of_line: return "head_of_line";
  }
  return "?";
}

struct DamperSpec {
  DamperVariant variant = DamperVariant::ideal;
  Seconds delta_l = 0;      // earliest release relative to the theoretical eligibility time
  Seconds delta_u = 0;      // latest release relative to the theoretical eligibility time
  Seconds granularity = 0;  // rounding grid, 0 = unset
  Seconds phi_min = 0;
  Seconds phi_max = 0;
  HeaderMode header_mode = HeaderMode::standard;
  Rounding rounding = Rounding::none;

  void validate() const {
    if (!(delta_l >= 0) || !(delta_u >= 0)) throw ConfigError("damper tolerances must be >= 0");
    if (variant == DamperVariant::ideal && (delta_l != 0 || delta_u != 0))
      throw ConfigError("ideal damper has zero tolerances");
    if (!(phi_min >= 0) || !(phi_max >= phi_min)) throw ConfigError("need 0 <= phi_min <= phi_max");
    if (variant != DamperVariant::head_of_line && phi_max != 0)
      throw ConfigError("processing times only apply to head-of-line dampers");
    if (rounding != Rounding::none && !(granularity > 0)) throw ConfigError("rounding needs a granularity");
  }

  bool fifo_constrained() const {
    return variant == DamperVariant::resequencing || variant == DamperVariant::head_of_line;
  }
};

namespace presets {

// Rate-controlled service with floor rounding to a grid of width `grid`.
inline DamperSpec rcsp(Seconds grid, Seconds eps) {
  return {DamperVariant::tolerance, grid + eps, eps, grid, 0, 0, HeaderMode::standard, Rounding::floor};
}
// Gate-controlled queues with ceil rounding.
inline DamperSpec rgcq(Seconds grid, Seconds eps) {
  return {DamperVariant::tolerance, eps, grid + eps, grid, 0, 0, HeaderMode::standard, Rounding::ceil};
}
inline DamperSpec fopleq(Seconds grid, Seconds eps) {
  return {DamperVariant::resequencing, grid + eps, eps, grid, 0, 0, HeaderMode::standard, Rounding::floor};
}
inline DamperSpec sced_plus(Seconds grid, Seconds eps) {
  return {DamperVariant::resequencing, grid + eps, eps, 0, 0, 0, HeaderMode::standard, Rounding::none};
}
inline DamperSpec hol(Seconds delta_l, Seconds delta_u, Seconds phi_min, Seconds phi_max) {
  return {DamperVariant::head_of_line, delta_l, delta_u, 0, phi_min, phi_max, HeaderMode::standard, Rounding::none};
}
inline DamperSpec ideal() { return {}; }

}  // namespace presets

// E~ = Q + H
template <typename T>
T theoretical_eligibility(T q_local, T header) {
  return q_local + header;
}

inline Seconds quantize(Seconds e_tilde, const DamperSpec& spec) {
  if (spec.rounding == Rounding::none) throw ConfigError("quantize called on a damper without rounding");
  if (!(spec.granularity > 0)) throw ConfigError("damper granularity unset");
  double q = e_tilde / spec.granularity;
  double r = std::round(q);
  if (std::abs(q - r) <= 1e-12 * std::max(1.0, std::abs(q))) return r * spec.granularity;
  return (spec.rounding == Rounding::floor ? std::floor(q) : std::ceil(q)) * spec.granularity;
}

inline Picos quantize(Picos e_tilde, Rounding mode, Picos grid) {
  if (mode == Rounding::none) throw ConfigError("quantize called on a damper without rounding");
  if (grid <= 0) throw ConfigError("damper granularity unset");
  return (mode == Rounding::floor ? floor_div(e_tilde, grid) : ceil_div(e_tilde, grid)) * grid;
}

// E_n = max(E~bar_n, E_{n-1})
template <typename T>
std::vector<T> resequence_release(const std::vector<T>& tentatives) {
  std::vector<T> out;
  out.reserve(tentatives.size());
  for (const T& e : tentatives) out.push_back(out.empty() ? e : std::max(e, out.back()));
  return out;
}

// E_n = max(E~bar_n, E_{n-1}) + phi_n
template <typename T>
std::vector<T> hol_release(const std::vector<T>& tentatives, const std::vector<T>& processing, T phi_min, T phi_max) {
  if (tentatives.size() != processing.size()) throw DomainError("one processing time per packet");
  std::vector<T> out;
  out.reserve(tentatives.size());
  for (std::size_t n = 0; n < tentatives.size(); ++n) {
    if (processing[n] < phi_min || processing[n] > phi_max) throw DomainError("processing time out of range");
    T base = out.empty() ? tentatives[n] : std::max(tentatives[n], out.back());
    out.push_back(base + processing[n]);
  }
  return out;
}

template <typename T>
std::vector<T> hol_release(const std::vector<T>& tentatives, const std::vector<T>& processing) {
  if (processing.empty()) return hol_release(tentatives, processing, T{}, T{});
  auto [lo, hi] = std::minmax_element(processing.begin(), processing.end());
  return hol_release(tentatives, processing, std::min(*lo, T{}), *hi);
}

struct HolWitness {
  Seconds x;
  Seconds y;
};

// Find x in [x_min, x_max], y in [y_min, y_max] with z = x + max(a, y).
inline HolWitness hol_decompose(Seconds a, Seconds x_min, Seconds x_max, Seconds y_min, Seconds y_max, Seconds z) {
  if (x_min > x_max || y_min > y_max) throw DomainError("empty witness box");
  const Seconds lo = x_min + std::max(a, y_min), hi = x_max + std::max(a, y_max);
  const Seconds slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (z < lo - slack || z > hi + slack) throw InfeasibleError("z outside the reachable interval");
  // v = max(a, y) ranges over [max(a, y_min), max(a, y_max)]; the largest v with z - v >= x_min works
  const Seconds v = std::clamp(z - x_min, std::max(a, y_min), std::max(a, y_max));
  const Seconds x = std::clamp(z - v, x_min, x_max);
  const Seconds y = v > a ? v : y_min;  // v == a here, and then y_min <= a
  return {x, y};
}

// Damper-header increment at a JCS. TE time-stamping measures from the upstream theoretical
// eligibility time, so it adds back the upstream damper's late tolerance.
template <typename T>
T earliness(T delta, T a_ts_local, T w_dhu_local, HeaderMode mode, std::optional<T> upstream_delta_u = std::nullopt) {
  if (mode == HeaderMode::te_stamping) {
    if (!upstream_delta_u) throw ConfigError("TE time-stamping needs an upstream damper");
    return delta + *upstream_delta_u - (w_dhu_local - a_ts_local);
  }
  return delta - (w_dhu_local - a_ts_local);
}

// Five error sources of a header update; their sum must stay within epsilon.
struct HeaderErrorBudget {
  Seconds e_update = 0;
  Seconds e_ts = 0;
  Seconds e_tran = 0;
  Seconds e_acq = 0;
  Seconds e_clk = 0;
  Seconds epsilon = 0;

  Seconds total() const { return e_update + e_ts + e_tran + e_acq + e_clk; }
  bool within_bound() const { return std::abs(total()) <= epsilon * (1 + 1e-12); }
};

enum class ErrorMode { random, adversarial_plus, adversarial_minus, zero };

// Draws the five components so that their sum lies in [-epsilon, epsilon].
template <typename Rng>
HeaderErrorBudget sample_header_error(Seconds epsilon, ErrorMode mode, Rng& rng) {
  HeaderErrorBudget b;
  b.epsilon = epsilon;
  switch (mode) {
    case ErrorMode::zero: return b;
    case ErrorMode::adversarial_plus: b.e_update = epsilon; return b;
    case ErrorMode::adversarial_minus: b.e_update = -epsilon; return b;
    case ErrorMode::random: break;
  }
  std::uniform_real_distribution<double> u(-epsilon / 5, epsilon / 5);
  b.e_update = u(rng);
  b.e_ts = u(rng);
  b.e_tran = u(rng);
  b.e_acq = u(rng);
  b.e_clk = u(rng);
  return b;
}

inline Seconds apply_header_error(Seconds true_increment, const HeaderErrorBudget& budget) {
  return true_increment + budget.total();
}

template <typename Rng>
Seconds apply_header_error(Seconds true_increment, Seconds epsilon, ErrorMode mode, Rng& rng) {
  return apply_header_error(true_increment, sample_header_error(epsilon, mode, rng));
}

// Integer variant used by the simulator: the draw is in whole picoseconds.
template <typename Rng>
Picos header_error_ps(Picos epsilon, ErrorMode mode, Rng& rng) {
  switch (mode) {
    case ErrorMode::zero: return 0;
    case ErrorMode::adversarial_plus: return epsilon;
    case ErrorMode::adversarial_minus: return -epsilon;
    case ErrorMode::random: break;
  }
  Picos fifth = epsilon / 5;
  std::uniform_int_distribution<Picos> u(-fifth, fifth);
  Picos s = 0;
  for (int i = 0; i < 5; ++i) s += u(rng);
  return s;
}

// --- envelope membership checks

template <typename T>
bool in_tolerance_envelope(T e_tilde, T e, T delta_l, T delta_u) {
  return e_tilde - delta_l <= e && e <= e_tilde + delta_u;
}

// E_n must lie within the tolerances around the running max of theoretical times.
template <typename T>
bool in_resequencing_envelope(const std::vector<T>& e_tilde, const std::vector<T>& e, T delta_l, T delta_u) {
  if (e_tilde.size() != e.size()) return false;
  T run{};
  for (std::size_t n = 0; n < e.size(); ++n) {
    run = n == 0 ? e_tilde[0] : std::max(run, e_tilde[n]);
    if (n > 0 && e[n] < e[n - 1]) return false;
    if (!(run - delta_l <= e[n] && e[n] <= run + delta_u)) return false;
  }
  return true;
}

// E_n = x_n + max(E_{n-1}, y_n) with y_n within the tolerances and x_n in [phi_min, phi_max].
template <typename T>
bool in_hol_envelope(const std::vector<T>& e_tilde, const std::vector<T>& e, T delta_l, T delta_u, T phi_min,
                     T phi_max) {
  if (e_tilde.size() != e.size()) return false;
  for (std::size_t n = 0; n < e.size(); ++n) {
    T a = n == 0 ? std::numeric_limits<T>::lowest() / 2 : e[n - 1];
    T lo = phi_min + std::max(a, e_tilde[n] - delta_l);
    T hi = phi_max + std::max(a, e_tilde[n] + delta_u);
    if (e[n] < lo || e[n] > hi) return false;
  }
  return true;
}

}  // namespace damperlab
