#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "curves.hpp"
#include "errors.hpp"
#include "units.hpp"

namespace damperlab {

struct Interval {
  Seconds lo;
  Seconds hi;
};

// Stability bound rho, timing-jitter bound eta, time-error bound omega (inf = not synchronized).
struct ClockModel {
  double rho = 1.0;
  Seconds eta = 0.0;
  Seconds omega = kInf;

  static ClockModel gptp() { return {1.0 + 1e-4, 2 * kNs, 1 * kUs}; }
  static ClockModel white_rabbit() { return {1.0 + 1e-4, 2 * kNs, 100 * kNs}; }
  static ClockModel ntp() { return {1.0 + 1e-4, 2 * kNs, 100 * kMs}; }
  static ClockModel free_running() { return {1.0 + 1e-4, 2 * kNs, kInf}; }
  static ClockModel ideal() { return {1.0, 0.0, kInf}; }

  bool synchronized() const { return std::isfinite(omega); }

  void validate() const {
    if (!(rho >= 1)) throw ConfigError("clock rho must be >= 1");
    if (!(eta >= 0)) throw ConfigError("clock eta must be >= 0");
    if (!(omega > 0)) throw ConfigError("clock omega must be > 0");
  }
};

inline ClockModel clock_preset(const std::string& name) {
  if (name == "gptp") return ClockModel::gptp();
  if (name == "white_rabbit") return ClockModel::white_rabbit();
  if (name == "ntp") return ClockModel::ntp();
  if (name == "free_running") return ClockModel::free_running();
  if (name == "ideal") return ClockModel::ideal();
  throw ConfigError("unknown clock preset '" + name + "'");
}

// min(x, 2*omega) with omega = inf disabling the second branch
inline double sync_cap(double x, Seconds omega, double copies = 1.0) {
  return std::isinf(omega) ? x : std::min(x, 2.0 * copies * omega);
}

// Range of d_TAI - d_local for a delay measured as d_local.
inline Interval delay_deviation_bounds(Seconds d_local, const ClockModel& c) {
  if (!(d_local >= 0)) throw DomainError("negative measured delay");
  double hi = sync_cap((c.rho - 1) * d_local + c.eta, c.omega);
  double lo = -sync_cap((1 - 1 / c.rho) * d_local + c.eta / c.rho, c.omega);
  return {lo, hi};
}

// alpha(min(rho*t + eta, t + 2*omega))
inline Curve arrival_curve_to_tai(const Curve& alpha, const ClockModel& c) {
  Curve drift = [&] {
    if (const auto* lb = std::get_if<shape::LeakyBucket>(&alpha.rep()))
      return Curve::leaky_bucket(c.rho * lb->rate, lb->burst + lb->rate * c.eta, alpha.unit());
    return Curve::shifted(alpha, c.eta, c.rho);
  }();
  if (!c.synchronized()) return drift;
  return Curve::min(drift, Curve::shifted(alpha, 2 * c.omega, 1.0));
}

enum class TrajectoryMode { random, fast_adversarial, slow_adversarial, sync_adversarial_fast, sync_adversarial_slow };

inline TrajectoryMode trajectory_mode_from(const std::string& s) {
  if (s == "random") return TrajectoryMode::random;
  if (s == "fast_adversarial") return TrajectoryMode::fast_adversarial;
  if (s == "slow_adversarial") return TrajectoryMode::slow_adversarial;
  if (s == "sync_adversarial_fast") return TrajectoryMode::sync_adversarial_fast;
  if (s == "sync_adversarial_slow") return TrajectoryMode::sync_adversarial_slow;
  throw ConfigError("unknown trajectory mode '" + s + "'");
}

// TAI duration of a locally measured delay d >= 0 under an adversarial law.
// "fast" modes stretch TAI durations to the upper edge of the deviation bounds, "slow" to the lower edge.
inline Seconds adversarial_tai_duration(TrajectoryMode m, const ClockModel& c, Seconds d) {
  switch (m) {
    case TrajectoryMode::fast_adversarial: return c.rho * d + c.eta;
    case TrajectoryMode::slow_adversarial: return (d - c.eta) / c.rho;
    case TrajectoryMode::sync_adversarial_fast: return d + 2 * c.omega;
    case TrajectoryMode::sync_adversarial_slow: return d - 2 * c.omega;
    case TrajectoryMode::random: break;
  }
  return d;
}

// Map from TAI to local time in integer picoseconds.
// Random mode is piecewise affine: local(t) = L_i + floor(num_i * (t - T_i) / kDen) on segment i.
// Adversarial modes have no global map; they fix the TAI length of every measured interval.
class ClockTrajectory {
 public:
  static constexpr std::int64_t kDen = 1000000000000LL;

  ClockTrajectory() = default;

  ClockTrajectory(const ClockModel& clock, std::uint64_t seed, TrajectoryMode mode,
                  Picos horizon = 2 * 1000 * kPsPerMs, Picos segment = kPsPerMs)
      : clock_(clock), mode_(mode) {
    clock.validate();
    if (mode != TrajectoryMode::random) {
      if ((mode == TrajectoryMode::sync_adversarial_fast || mode == TrajectoryMode::sync_adversarial_slow) &&
          !clock.synchronized())
        throw ConfigError("adversarial sync trajectory needs a finite omega");
      return;
    }
    std::mt19937_64 rng(seed);
    if (clock.rho == 1.0) {
      segs_.push_back({0, 0, kDen});
      return;
    }
    const double lo = 1.0 / clock.rho, hi = clock.rho;
    // keep |offset| strictly inside omega, leaving room for floor rounding
    const double max_off = clock.synchronized() ? std::max(0.0, clock.omega * 1e12 - 2.0) : kInf;
    std::uniform_real_distribution<double> slope(lo, hi);
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    Picos t = 0;
    Picos l = 0;
    if (std::isfinite(max_off)) {
      std::uniform_real_distribution<double> off(-0.5 * max_off, 0.5 * max_off);
      l = static_cast<Picos>(off(rng));
    }
    while (t <= horizon) {
      Picos len = std::max<Picos>(1, static_cast<Picos>(segment * jitter(rng)));
      double s = slope(rng);
      double off0 = static_cast<double>(l - t);
      double off1 = off0 + (s - 1.0) * static_cast<double>(len);
      if (off1 > max_off) s = 1.0 + (max_off - off0) / static_cast<double>(len);
      if (off1 < -max_off) s = 1.0 + (-max_off - off0) / static_cast<double>(len);
      s = std::clamp(s, lo, hi);
      auto num = static_cast<std::int64_t>(std::floor(s * static_cast<double>(kDen)));
      // floor may push the numerator below 1/rho by one unit
      while (static_cast<double>(num) < lo * static_cast<double>(kDen)) ++num;
      segs_.push_back({t, l, num});
      l += static_cast<Picos>(floor_div<__int128>(static_cast<__int128>(num) * len, kDen));
      t += len;
    }
    segs_.push_back({t, l, kDen});  // beyond the horizon: constant offset
  }

  TrajectoryMode mode() const { return mode_; }
  const ClockModel& clock() const { return clock_; }

  Picos local_at(Picos tai) const {
    if (mode_ != TrajectoryMode::random || segs_.empty()) return tai;
    const Seg& s = seg_for_tai(tai);
    return s.l + static_cast<Picos>(floor_div<__int128>(static_cast<__int128>(s.num) * (tai - s.t), kDen));
  }

  // smallest TAI instant whose local reading is >= local
  Picos tai_at(Picos local) const {
    if (mode_ != TrajectoryMode::random || segs_.empty()) return local;
    auto it = std::upper_bound(segs_.begin(), segs_.end(), local,
                               [](Picos v, const Seg& s) { return v <= s.l; });
    // it points to first segment with l >= local; the answer lies in the previous one
    const Seg& s = it == segs_.begin() ? segs_.front() : *std::prev(it);
    Picos dt = static_cast<Picos>(ceil_div<__int128>(static_cast<__int128>(local - s.l) * kDen, s.num));
    return s.t + dt;
  }

  // TAI instant at which a local duration d (possibly negative) has elapsed since TAI instant a.
  Picos advance(Picos a_tai, Picos d_local) const {
    if (mode_ == TrajectoryMode::random) return tai_at(local_at(a_tai) + d_local);
    if (d_local < 0) return a_tai + d_local;
    double d = adversarial_tai_duration(mode_, clock_, static_cast<double>(d_local) * 1e-12);
    return a_tai + static_cast<Picos>(std::llround(d * 1e12));
  }

  // Local duration measured between two TAI instants.
  Picos measure(Picos t1, Picos t2) const {
    if (mode_ == TrajectoryMode::random) return local_at(t2) - local_at(t1);
    return t2 - t1;
  }

 private:
  struct Seg {
    Picos t;  // TAI start
    Picos l;  // local reading at t
    std::int64_t num;
  };

  const Seg& seg_for_tai(Picos tai) const {
    auto it = std::upper_bound(segs_.begin(), segs_.end(), tai, [](Picos v, const Seg& s) { return v < s.t; });
    return it == segs_.begin() ? segs_.front() : *std::prev(it);
  }

  ClockModel clock_{};
  TrajectoryMode mode_ = TrajectoryMode::random;
  std::vector<Seg> segs_;
};

inline ClockTrajectory sample_trajectory(const ClockModel& clock, std::uint64_t seed, TrajectoryMode mode) {
  return ClockTrajectory(clock, seed, mode);
}

}  // namespace damperlab
