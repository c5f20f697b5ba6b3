#pragma once

#include <random>
#include <string>

#include "damperlab/damperlab.hpp"

namespace damperlab::testing {

inline double uni(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uni_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
// rounded to whole picoseconds so that the simulator sees exactly the analysed values
inline Seconds ps_round(Seconds s) { return from_ps(to_ps(s)); }

inline ClockModel random_clock(std::mt19937_64& rng, bool allow_sync = true) {
  ClockModel c;
  c.rho = 1.0 + (uni_int(rng, 0, 4) == 0 ? 0.0 : uni(rng, 1e-6, 2e-4));
  c.eta = ps_round(uni(rng, 1, 5) * kNs);
  c.omega = allow_sync && uni_int(rng, 0, 1) ? ps_round(uni(rng, 0.05, 5) * kUs) : kInf;
  return c;
}

inline DamperSpec random_damper(std::mt19937_64& rng, DamperVariant v) {
  const Seconds grid = ps_round(uni(rng, 0.1, 2) * kUs), eps = ps_round(uni(rng, 1, 50) * kNs);
  switch (v) {
    case DamperVariant::ideal: return presets::ideal();
    case DamperVariant::tolerance:
      switch (uni_int(rng, 0, 2)) {
        case 0: return presets::rcsp(grid, eps);
        case 1: return presets::rgcq(grid, eps);
        default: {
          DamperSpec d;
          d.variant = DamperVariant::tolerance;
          d.delta_l = ps_round(uni(rng, 0, 1) * kUs);
          d.delta_u = ps_round(uni(rng, 0, 1) * kUs);
          return d;
        }
      }
    case DamperVariant::resequencing: return uni_int(rng, 0, 1) ? presets::fopleq(grid, eps) : presets::sced_plus(grid, eps);
    case DamperVariant::head_of_line: {
      const Seconds phi_max = uni_int(rng, 0, 3) == 0 ? 0.0 : ps_round(uni(rng, 0, 20) * kNs);
      return presets::hol(ps_round(uni(rng, 0, 1) * kUs), ps_round(uni(rng, 0, 1) * kUs), ps_round(uni(rng, 0, 1) * phi_max), phi_max);
    }
  }
  return presets::ideal();
}

// 1..4 JCSs and 0..2 BDSs in random order.
inline Block random_block(std::mt19937_64& rng, DamperVariant v, bool non_fifo, const ClockModel& clock, int min_jcs = 1) {
  Block b;
  b.id = "fuzz";
  b.clock = clock;
  b.damper = random_damper(rng, v);
  const int k = uni_int(rng, min_jcs, 4), nb = uni_int(rng, 0, 2);
  std::vector<Element> els;
  for (int i = 0; i < k; ++i) {
    JcsSpec j;
    j.delta = ps_round(uni(rng, 1, 300) * kUs);
    j.delta_min = ps_round(uni(rng, 0, 0.5) * j.delta);
    j.epsilon = ps_round(uni(rng, 0, 100) * kNs);
    j.clock_id = "c" + std::to_string(i);
    els.emplace_back(j);
  }
  for (int i = 0; i < nb; ++i) {
    BdsSpec s;
    s.pi_lower = ps_round(uni(rng, 0, 50) * kUs);
    s.pi_upper = s.pi_lower + ps_round(uni(rng, 0, 20) * kUs);
    s.nu = s.pi_upper - s.pi_lower;
    els.emplace_back(s);
  }
  std::shuffle(els.begin(), els.end(), rng);
  if (non_fifo) std::visit([](auto& x) { x.fifo = false; }, els[static_cast<std::size_t>(uni_int(rng, 0, static_cast<int>(els.size()) - 1))]);
  b.elements = std::move(els);
  return b;
}

inline SourceSpec random_source(std::mt19937_64& rng) {
  SourceSpec s;
  s.kind = static_cast<SourceKind>(uni_int(rng, 0, 2));
  s.burst = uni_int(rng, 1, 4);
  s.period = to_ps(uni(rng, 20, 300) * kUs);
  s.gap = s.kind == SourceKind::back_to_back ? to_ps(uni(rng, 0, 2) * kUs) : 0;
  return s;
}

// Integer-picosecond slack for bound checks: local/TAI conversions round once per measured interval.
inline Picos rounding_slack(const Block& b) { return 2 * (b.jcs_count() + 1) + 2; }

}  // namespace damperlab::testing
