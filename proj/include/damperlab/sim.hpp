#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "bounds.hpp"
#include "clocks.hpp"
#include "curves.hpp"
#include "dampers.hpp"
#include "errors.hpp"
#include "units.hpp"

namespace damperlab {

// splitmix64: derives independent per-trial / per-element seeds from one run seed
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------- sources

enum class SourceKind { periodic, back_to_back, bounded_random };

// `burst` packets per `period`; the declared per-packet curve is staircase(burst, period, burst).
struct SourceSpec {
  SourceKind kind = SourceKind::periodic;
  int burst = 1;
  Picos period = 100 * kPsPerUs;
  Picos gap = 0;        // spacing inside a burst for back_to_back
  Picos start = kPsPerMs;

  Curve alpha_packets() const {
    return Curve::staircase(burst, from_ps(period), burst, Unit::packets);
  }
};

// Checks I_n - I_m >= alpha_down(n - m + 1) over a bounded lookback.
inline bool trace_conforms(const std::vector<Picos>& arrivals, const Curve& alpha, std::size_t lookback = 256) {
  std::vector<Picos> need(lookback + 2, 0);
  for (std::size_t k = 1; k < need.size(); ++k) {
    Seconds inv = alpha.lower_pseudo_inverse(static_cast<double>(k));
    need[k] = std::isinf(inv) ? INT64_MAX : static_cast<Picos>(std::ceil(inv * 1e12 - 1e-3));
  }
  for (std::size_t n = 0; n < arrivals.size(); ++n) {
    if (n > 0 && arrivals[n] < arrivals[n - 1]) return false;
    for (std::size_t k = 2; k <= lookback && k <= n + 1; ++k)
      if (arrivals[n] - arrivals[n + 1 - k] < need[k]) return false;
  }
  return true;
}

inline std::vector<Picos> generate_source(const SourceSpec& s, std::size_t packets, std::uint64_t seed) {
  if (s.burst < 1 || s.period <= 0) throw ConfigError("source needs burst >= 1 and period > 0");
  std::vector<Picos> out;
  out.reserve(packets);
  switch (s.kind) {
    case SourceKind::periodic:
      for (std::size_t n = 0; n < packets; ++n)
        out.push_back(s.start + static_cast<Picos>(n / static_cast<std::size_t>(s.burst)) * s.period);
      break;
    case SourceKind::back_to_back:
      if (s.gap * (s.burst - 1) >= s.period) throw ConfigError("back-to-back burst does not fit in the period");
      for (std::size_t n = 0; n < packets; ++n) {
        auto b = static_cast<Picos>(s.burst);
        out.push_back(s.start + static_cast<Picos>(n) / b * s.period + static_cast<Picos>(n) % b * s.gap);
      }
      break;
    case SourceKind::bounded_random: {
      // greedy: random candidate pushed to the earliest conforming instant
      std::mt19937_64 rng(mix_seed(seed, 0x50));
      std::exponential_distribution<double> gap(static_cast<double>(s.burst) / static_cast<double>(s.period));
      const auto b = static_cast<std::size_t>(s.burst);
      Picos t = s.start;
      for (std::size_t n = 0; n < packets; ++n) {
        if (n > 0) t += static_cast<Picos>(gap(rng) * 0.7);
        if (n >= b) t = std::max(t, out[n - b] + s.period);
        out.push_back(t);
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------- block simulation

enum class ReleasePin { random, earliest, latest };
enum class DelayPolicy { uniform, max, min };

struct SimConfig {
  Block block;
  SourceSpec source;
  std::size_t packets = 1000;
  std::uint64_t seed = 1;
  TrajectoryMode clock_mode = TrajectoryMode::random;
  ErrorMode error_mode = ErrorMode::random;
  ReleasePin pin = ReleasePin::random;
  DelayPolicy delay_policy = DelayPolicy::uniform;
  double delay_floor_fraction = 0.2;  // uniform JCS delays are drawn in [max(delta_min, f*delta), delta]
};

struct PacketRecord {
  std::int64_t id = 0;
  Picos entry = 0;        // A, TAI
  Picos exit = 0;         // release, TAI
  Picos delay = 0;
  bool reordered = false;
  Picos q_local = 0;      // damper arrival, damper clock
  Picos header = 0;       // H
  Picos e_theoretical = 0;  // Q + H
  Picos e_tentative = 0;    // after the tolerance law
  Picos e_actual = 0;       // after re-sequencing / head-of-line queueing, damper clock
};

struct SimReport {
  std::vector<PacketRecord> packets;
  Picos min_delay = 0;
  Picos max_delay = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> reorder_events;  // (earlier entrant, later entrant)

  bool operator==(const SimReport& o) const {
    if (packets.size() != o.packets.size() || min_delay != o.min_delay || max_delay != o.max_delay) return false;
    for (std::size_t i = 0; i < packets.size(); ++i) {
      const auto &a = packets[i], &b = o.packets[i];
      if (a.id != b.id || a.entry != b.entry || a.exit != b.exit || a.e_actual != b.e_actual) return false;
    }
    return reorder_events == o.reorder_events;
  }
};

namespace detail {

inline void finalize(SimReport& r) {
  std::sort(r.packets.begin(), r.packets.end(), [](const PacketRecord& a, const PacketRecord& b) {
    return a.entry != b.entry ? a.entry < b.entry : a.id < b.id;
  });
  r.reorder_events.clear();
  Picos run_max = INT64_MIN;
  std::int64_t run_id = -1;
  r.min_delay = INT64_MAX;
  r.max_delay = INT64_MIN;
  for (auto& p : r.packets) {
    p.delay = p.exit - p.entry;
    p.reordered = p.exit < run_max;
    if (p.reordered) r.reorder_events.emplace_back(run_id, p.id);
    if (p.exit > run_max) {
      run_max = p.exit;
      run_id = p.id;
    }
    r.min_delay = std::min(r.min_delay, p.delay);
    r.max_delay = std::max(r.max_delay, p.delay);
  }
  if (r.packets.empty()) r.min_delay = r.max_delay = 0;
}

// Sort packet indices by current instant (ties by id).
inline std::vector<std::size_t> order_by(const std::vector<Picos>& t, const std::vector<std::int64_t>& ids) {
  std::vector<std::size_t> idx(t.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t[a] != t[b] ? t[a] < t[b] : ids[a] < ids[b]; });
  return idx;
}

}  // namespace detail

// Runs a source trace through one block: JCS delays and header updates, BDS delays, then the damper.
inline SimReport simulate_block(const SimConfig& cfg) {
  const Block& b = cfg.block;
  b.validate();
  const Curve alpha = cfg.source.alpha_packets();
  std::vector<Picos> t = generate_source(cfg.source, cfg.packets, cfg.seed);
  if (!trace_conforms(t, alpha)) throw ConfigError("generated source trace violates its arrival curve");

  const std::size_t n = t.size();
  std::vector<std::int64_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  const std::vector<Picos> entry = t;
  std::vector<Picos> header(n, 0);
  std::mt19937_64 rng(mix_seed(cfg.seed, 1));

  // one trajectory per distinct JCS clock id, plus the damper's own clock
  std::vector<std::string> clock_ids;
  std::vector<ClockTrajectory> clocks;
  auto clock_for = [&](const std::string& id) -> const ClockTrajectory& {
    for (std::size_t i = 0; i < clock_ids.size(); ++i)
      if (!id.empty() && clock_ids[i] == id) return clocks[i];
    clock_ids.push_back(id);
    clocks.emplace_back(b.clock, mix_seed(cfg.seed, 100 + clocks.size()), cfg.clock_mode);
    return clocks.back();
  };
  clocks.reserve(b.elements.size() + 1);

  for (const auto& el : b.elements) {
    auto idx = detail::order_by(t, ids);
    if (const auto* j = std::get_if<JcsSpec>(&el)) {
      const ClockTrajectory& clk = clock_for(j->clock_id);
      const Picos delta = to_ps(j->delta);
      const Picos lo = std::max(to_ps(j->delta_min), static_cast<Picos>(std::llround(cfg.delay_floor_fraction * static_cast<double>(delta))));
      std::uniform_int_distribution<Picos> pick(std::min(lo, delta), delta);
      const Picos eps = to_ps(j->epsilon);
      Picos prev_w_local = INT64_MIN;
      for (std::size_t i : idx) {
        const Picos a_local = clk.local_at(t[i]);
        Picos d = cfg.delay_policy == DelayPolicy::max ? delta : cfg.delay_policy == DelayPolicy::min ? std::min(lo, delta) : pick(rng);
        Picos w_local = a_local + d;
        if (j->fifo) w_local = std::max(w_local, prev_w_local);
        prev_w_local = w_local;
        const Picos w_tai = clk.advance(t[i], w_local - a_local);
        const Picos measured = clk.mode() == TrajectoryMode::random ? clk.measure(t[i], w_tai) : w_local - a_local;
        header[i] += earliness<Picos>(delta, 0, measured, HeaderMode::standard) + header_error_ps(eps, cfg.error_mode, rng);
        t[i] = w_tai;
      }
    } else {
      const auto& s = std::get<BdsSpec>(el);
      const Picos lo = to_ps(s.pi_lower);
      const Picos hi = lo + std::min(to_ps(s.nu), to_ps(s.pi_upper) - lo);
      std::uniform_int_distribution<Picos> pick(lo, hi);
      Picos prev = INT64_MIN;
      for (std::size_t i : idx) {
        Picos w = t[i] + (cfg.delay_policy == DelayPolicy::max ? hi : cfg.delay_policy == DelayPolicy::min ? lo : pick(rng));
        if (s.fifo) w = std::max(w, prev);
        prev = w;
        t[i] = w;
      }
    }
  }

  // damper
  const DamperSpec& dsp = b.damper;
  ClockTrajectory dclk(b.clock, mix_seed(cfg.seed, 99), cfg.clock_mode);
  const Picos dl = to_ps(dsp.delta_l), du = to_ps(dsp.delta_u), grid = to_ps(dsp.granularity);
  const Picos phi_lo = to_ps(dsp.phi_min), phi_hi = to_ps(dsp.phi_max);
  if (dsp.rounding == Rounding::floor && grid + du > dl)
    throw ConfigError("floor-rounding damper needs granularity + delta_u <= delta_l");
  if (dsp.rounding == Rounding::ceil && grid + dl > du)
    throw ConfigError("ceil-rounding damper needs granularity + delta_l <= delta_u");

  auto idx = detail::order_by(t, ids);
  SimReport rep;
  rep.packets.resize(n);
  Picos prev_e = INT64_MIN;
  for (std::size_t i : idx) {
    PacketRecord& p = rep.packets[i];
    p.id = ids[i];
    p.entry = entry[i];
    p.q_local = dclk.local_at(t[i]);
    p.header = header[i];
    p.e_theoretical = theoretical_eligibility(p.q_local, p.header);
    Picos e = p.e_theoretical;
    if (cfg.pin == ReleasePin::earliest) {
      e -= dl;
    } else if (cfg.pin == ReleasePin::latest) {
      e += du;
    } else if (dsp.rounding == Rounding::floor) {
      e = quantize(e + std::uniform_int_distribution<Picos>(-du, du)(rng), Rounding::floor, grid);
    } else if (dsp.rounding == Rounding::ceil) {
      e = quantize(e + std::uniform_int_distribution<Picos>(-dl, dl)(rng), Rounding::ceil, grid);
    } else if (dl + du > 0) {
      e += std::uniform_int_distribution<Picos>(-dl, du)(rng);
    }
    p.e_tentative = e;
    e = std::max(e, p.q_local);  // never released before arrival
    if (dsp.variant == DamperVariant::resequencing) {
      e = std::max(e, prev_e);
    } else if (dsp.variant == DamperVariant::head_of_line) {
      const Picos phi = std::uniform_int_distribution<Picos>(phi_lo, phi_hi)(rng);
      e = std::max(e, prev_e) + phi;
    }
    prev_e = e;
    p.e_actual = e;
    p.exit = dclk.advance(t[i], e - p.q_local);
  }
  detail::finalize(rep);
  return rep;
}

struct Violation {
  std::int64_t packet_id;
  Picos delay;
  std::string kind;  // "above_upper", "below_lower", "jitter"
};

// Empty iff every delay lies in [D_lower, D_upper] (with tolerance) and the spread stays within V.
inline std::vector<Violation> check_bounds(const SimReport& r, const BoundsResult& bounds, Picos tolerance_ps = 0) {
  std::vector<Violation> out;
  const double up = bounds.d_upper * 1e12 + static_cast<double>(tolerance_ps);
  const double lo = bounds.d_lower * 1e12 - static_cast<double>(tolerance_ps);
  for (const auto& p : r.packets) {
    if (static_cast<double>(p.delay) > up) out.push_back({p.id, p.delay, "above_upper"});
    if (static_cast<double>(p.delay) < lo) out.push_back({p.id, p.delay, "below_lower"});
  }
  if (!r.packets.empty() &&
      static_cast<double>(r.max_delay - r.min_delay) > bounds.jitter * 1e12 + 2.0 * static_cast<double>(tolerance_ps))
    out.push_back({-1, r.max_delay - r.min_delay, "jitter"});
  return out;
}

// ---------------------------------------------------------------- tightness traces

enum class TightnessTarget { upper_drift, upper_sync, lower_drift, lower_sync };

inline TightnessTarget tightness_target_from(const std::string& s) {
  if (s == "upper_drift") return TightnessTarget::upper_drift;
  if (s == "upper_sync") return TightnessTarget::upper_sync;
  if (s == "lower_drift") return TightnessTarget::lower_drift;
  if (s == "lower_sync") return TightnessTarget::lower_sync;
  throw ConfigError("unknown tightness target '" + s + "'");
}

struct TightnessTrace {
  SimReport report;
  Seconds delay = 0;                   // exact, before rounding to picoseconds
  std::vector<Seconds> local_delays;   // per JCS, local time
  Seconds hold_local = 0;              // damper holding time, damper clock
};

// Single-packet scripted trace with adversarial clocks: every JCS and the damper stretch (or shrink)
// each measured interval to one edge of the deviation bounds, headers carry +eps (-eps) and the
// damper releases at the latest (earliest) instant.
inline TightnessTrace tightness_trace(const Block& b, TightnessTarget target) {
  b.validate();
  const ClockModel& c = b.clock;
  const bool upper = target == TightnessTarget::upper_drift || target == TightnessTarget::upper_sync;
  const bool sync = target == TightnessTarget::upper_sync || target == TightnessTarget::lower_sync;
  if (sync && !c.synchronized()) throw ConfigError("sync tightness target needs a finite omega");
  if (b.distinct_clock_count && *b.distinct_clock_count != b.jcs_count())
    throw ConfigError("tightness traces assume one clock per JCS");
  TrajectoryMode mode = upper ? (sync ? TrajectoryMode::sync_adversarial_fast : TrajectoryMode::fast_adversarial)
                              : (sync ? TrajectoryMode::sync_adversarial_slow : TrajectoryMode::slow_adversarial);

  // Each interval must sit on the side of the crossover where the chosen branch of the min binds.
  const double r1 = c.rho - 1, s1 = 1 - 1 / c.rho;
  Seconds cross = kInf;
  if (c.synchronized()) {
    if (upper) cross = r1 > 0 ? (2 * c.omega - c.eta) / r1 : (c.eta <= 2 * c.omega ? kInf : -kInf);
    else cross = s1 > 0 ? (2 * c.omega - c.eta / c.rho) / s1 : (c.eta / c.rho <= 2 * c.omega ? kInf : -kInf);
  }
  Seconds iv_lo = 0, iv_hi = kInf;
  if (sync) iv_lo = std::max(0.0, cross);
  else iv_hi = cross;
  if (!upper) iv_lo = std::max(iv_lo, sync ? 2 * c.omega : c.eta);  // TAI durations stay non-negative

  const Seconds se = b.sum_epsilon();
  const Seconds total = upper ? b.sum_delta() + se + b.damper.delta_u : b.sum_delta() - se - b.damper.delta_l;

  // split `total` into K JCS delays in [max(delta_min, lo), min(delta, hi)] plus a holding time in [lo, hi]
  std::vector<Seconds> lo_j, hi_j;
  for (const auto& e : b.elements)
    if (const auto* j = std::get_if<JcsSpec>(&e)) {
      lo_j.push_back(std::max(j->delta_min, iv_lo));
      hi_j.push_back(std::min(j->delta, iv_hi));
      if (lo_j.back() > hi_j.back() * (1 + 1e-12)) throw ConfigError("tightness target infeasible: JCS interval off-branch");
    }
  const Seconds min_sum = std::accumulate(lo_j.begin(), lo_j.end(), 0.0) + iv_lo;
  const Seconds max_sum = std::accumulate(hi_j.begin(), hi_j.end(), 0.0) + iv_hi;
  if (total < min_sum * (1 - 1e-12) - 1e-15 || total > max_sum * (1 + 1e-12) + 1e-15)
    throw ConfigError("tightness target infeasible: the chosen branch of the clock bound does not bind");
  std::vector<Seconds> d = lo_j;
  Seconds rest = total - min_sum;
  for (std::size_t i = 0; i < d.size(); ++i) {
    Seconds add = std::min(rest, hi_j[i] - lo_j[i]);
    d[i] += add;
    rest -= add;
  }
  const Seconds hold = iv_lo + std::max(0.0, rest);

  TightnessTrace tr;
  tr.local_delays = d;
  tr.hold_local = hold;
  Seconds delay = 0;
  std::size_t k = 0;
  for (const auto& e : b.elements) {
    if (std::holds_alternative<JcsSpec>(e)) delay += adversarial_tai_duration(mode, c, d[k++]);
    else delay += upper ? std::get<BdsSpec>(e).pi_upper : std::get<BdsSpec>(e).pi_lower;
  }
  delay += adversarial_tai_duration(mode, c, hold);
  tr.delay = delay;
  PacketRecord p;
  p.id = 0;
  p.entry = kPsPerMs;
  p.exit = p.entry + to_ps(delay);
  tr.report.packets.push_back(p);
  detail::finalize(tr.report);
  return tr;
}

struct NonFifoTightness {
  Seconds delay_first;   // packet that entered first and is held behind the second
  Seconds delay_second;  // reaches the FIFO-case upper bound
  Seconds realized_j;    // spread of the two packets' delays up to the last non-FIFO element
};

// Two packets under fast adversarial clocks. Up to the last non-FIFO element the first takes the
// maximal JCS delays and the second (entering realized_j later) the minimal ones, so both leave it
// together in swapped order; BDS delays are pi_upper for both. Afterwards they move in lockstep. The
// second's hold returns its earliness, so its delay is D_upper; the re-sequencing damper then
// releases the first right behind it.
inline NonFifoTightness tightness_trace_nonfifo(const Block& b) {
  b.validate();
  auto e_idx = last_non_fifo_index(b);
  if (!e_idx) throw ConfigError("block has no non-FIFO element");
  if (b.damper.variant != DamperVariant::resequencing) throw ConfigError("non-FIFO tightness needs a re-sequencing damper");
  const ClockModel& c = b.clock;
  const auto mode = TrajectoryMode::fast_adversarial;
  const Seconds cross = c.synchronized() && c.rho > 1 ? (2 * c.omega - c.eta) / (c.rho - 1) : kInf;
  if (c.synchronized() && c.rho == 1 && c.eta > 2 * c.omega) throw ConfigError("drift branch never binds");

  Seconds p1 = 0, p2 = 0, rest = 0, earliness2 = 0;
  for (std::size_t i = 0; i < b.elements.size(); ++i) {
    if (const auto* j = std::get_if<JcsSpec>(&b.elements[i])) {
      if (j->delta > cross) throw ConfigError("non-FIFO tightness uses the drift branch; omega too small");
      if (i <= *e_idx) {
        p1 += adversarial_tai_duration(mode, c, j->delta);
        p2 += adversarial_tai_duration(mode, c, j->delta_min);
        earliness2 += j->delta - j->delta_min;
      } else {
        rest += adversarial_tai_duration(mode, c, j->delta);
      }
    } else {
      const Seconds pu = std::get<BdsSpec>(b.elements[i]).pi_upper;
      if (i <= *e_idx) {
        p1 += pu;
        p2 += pu;
      } else {
        rest += pu;
      }
    }
  }
  const Seconds hold2 = earliness2 + b.sum_epsilon() + b.damper.delta_u;
  if (hold2 > cross) throw ConfigError("non-FIFO tightness uses the drift branch; omega too small");
  const Seconds delay2 = p2 + rest + adversarial_tai_duration(mode, c, hold2);
  const Seconds j_real = p1 - p2;
  return {j_real + delay2, delay2, j_real};
}

// ---------------------------------------------------------------- reordering experiments

enum class ClockPairMode { symmetric, downstream_slower, downstream_faster };

inline ClockPairMode clock_pair_mode_from(const std::string& s) {
  if (s == "symmetric") return ClockPairMode::symmetric;
  if (s == "downstream_slower") return ClockPairMode::downstream_slower;
  if (s == "downstream_faster") return ClockPairMode::downstream_faster;
  throw ConfigError("unknown clock pair mode '" + s + "'");
}

struct RgcqExperiment {
  Seconds tau_local = 1.2 * kUs;  // transmission time of packet 2 seen by the upstream clock
  Seconds e_tran = 0;             // header error from transmission-time inference (pinned part)
  Seconds e_tran_spread = 0;      // plus a uniform draw in [-spread, spread]
  ClockPairMode clock_mode = ClockPairMode::symmetric;
  double rho = 1.0 + 1e-4;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
};

namespace detail {

// One two-packet trial. Returns E~_2 - E~_1 at the downstream damper, in picoseconds:
// e_tran + (tau seen downstream - tau seen upstream). Clock rates are local ticks per TAI tick.
template <typename Rng>
Picos rgcq_trial(const RgcqExperiment& x, Rng& rng) {
  const double lo = 1.0 / x.rho, hi = x.rho;
  std::uniform_real_distribution<double> any(lo, hi), below(lo, 1.0), above(1.0, hi);
  double up = 0, down = 0;
  switch (x.clock_mode) {
    case ClockPairMode::symmetric: up = any(rng); down = any(rng); break;
    // a slower clock ticks more per TAI second in this convention's sense of "measures longer"
    case ClockPairMode::downstream_slower: up = below(rng); down = above(rng); break;
    case ClockPairMode::downstream_faster: up = above(rng); down = below(rng); break;
  }
  const Picos tau_up = to_ps(x.tau_local);
  const double tau_tai = static_cast<double>(tau_up) / up;
  auto reading = [&](double rate, double ph) {
    return static_cast<Picos>(std::floor(ph + rate * tau_tai)) - static_cast<Picos>(std::floor(ph));
  };
  std::uniform_real_distribution<double> ph(0.0, 1.0);
  const Picos tau_down = reading(down, ph(rng));
  Picos err = to_ps(x.e_tran);
  if (x.e_tran_spread > 0) {
    const Picos s = to_ps(x.e_tran_spread);
    err += std::uniform_int_distribution<Picos>(-s, s)(rng);
  }
  return err + (tau_down - tau_up);
}

}  // namespace detail

struct RgcqResult {
  double frequency;
  std::size_t reorders;
  std::size_t trials;
};

// Fraction of trials in which packet 2 becomes eligible strictly before packet 1.
inline RgcqResult rgcq_reorder_experiment(const RgcqExperiment& x) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.trials; ++i) {
    std::mt19937_64 rng(mix_seed(x.seed, i));
    if (detail::rgcq_trial(x, rng) < 0) ++hits;
  }
  return {x.trials ? static_cast<double>(hits) / static_cast<double>(x.trials) : 0.0, hits, x.trials};
}

struct RcspExperiment {
  Seconds tau_tai = 0.2 * kUs;     // entrance spacing of the two packets
  Seconds delta_l = 1 * kUs;       // early tolerance; the grid is delta_l - delta_u
  Seconds delta_u = 2 * kNs;
  Seconds jcs_delta = 10 * kUs;
  Seconds epsilon = 2 * kNs;       // header error bound at the JCS
  ClockModel clock = ClockModel::free_running();
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
};

struct RcspResult {
  double p_backtoback;
  double p_reorder;
  std::size_t trials;
};

// Two packets through JCS -> RCSP -> (FIFO transmission) -> RCSP. Back-to-back when the first RCSP
// gives both the same release slot; reordered when, in addition, the downstream damper inverts
// their theoretical eligibility order.
inline RcspResult rcsp_backtoback_experiment(const RcspExperiment& x) {
  const Picos grid = to_ps(x.delta_l - x.delta_u);
  if (grid <= 0) throw ConfigError("rcsp experiment needs delta_l > delta_u");
  const Picos delta = to_ps(x.jcs_delta), eps = to_ps(x.epsilon), du = to_ps(x.delta_u);
  std::size_t b2b = 0, reord = 0;
  for (std::size_t i = 0; i < x.trials; ++i) {
    std::mt19937_64 rng(mix_seed(x.seed, i));
    ClockTrajectory jcs(x.clock, mix_seed(x.seed, 2 * i + 1), TrajectoryMode::random, 50 * kPsPerMs);
    ClockTrajectory damper(x.clock, mix_seed(x.seed, 2 * i + 2), TrajectoryMode::random, 50 * kPsPerMs);
    // uniform phase of the damper's slot grid relative to the packets
    const Picos a1 = kPsPerMs + std::uniform_int_distribution<Picos>(0, grid - 1)(rng);
    const Picos a2 = a1 + to_ps(x.tau_tai);
    std::uniform_int_distribution<Picos> pick(delta / 5, delta);
    Picos slot[2];
    Picos arr[2] = {a1, a2};
    Picos prev_w = INT64_MIN;
    for (int k = 0; k < 2; ++k) {
      const Picos a_loc = jcs.local_at(arr[k]);
      const Picos w_loc = std::max(a_loc + pick(rng), prev_w);
      prev_w = w_loc;
      const Picos w = jcs.advance(arr[k], w_loc - a_loc);
      const Picos h = delta - jcs.measure(arr[k], w) + header_error_ps(eps, ErrorMode::random, rng);
      const Picos e_tilde = damper.local_at(w) + h;
      slot[k] = quantize(e_tilde + std::uniform_int_distribution<Picos>(-du, du)(rng), Rounding::floor, grid);
    }
    if (slot[0] == slot[1]) {
      ++b2b;
      RgcqExperiment down;
      down.tau_local = 1.2 * kUs;
      down.rho = x.clock.rho;
      down.e_tran_spread = 0;
      if (detail::rgcq_trial(down, rng) < 0) ++reord;
    }
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, x.trials));
  return {static_cast<double>(b2b) / n, static_cast<double>(reord) / n, x.trials};
}

// ---------------------------------------------------------------- head-of-line equivalence

struct HolEquivalence {
  bool composition_equal;   // HoL recursion == re-sequencing then single-server FIFO queue
  bool closed_form_equal;   // HoL recursion == max_{m<=n} { E~bar_m + sum_{i=m..n} phi_i }
  bool equal() const { return composition_equal && closed_form_equal; }
};

// Single-server FIFO queue: O_n = max(I_n, O_{n-1}) + phi_n
inline std::vector<Picos> fifo_queue(const std::vector<Picos>& in, const std::vector<Picos>& phi) {
  std::vector<Picos> out(in.size());
  for (std::size_t n = 0; n < in.size(); ++n) out[n] = (n == 0 ? in[0] : std::max(in[n], out[n - 1])) + phi[n];
  return out;
}

// max_{m<=n} { x_m + sum_{i=m..n} phi_i }; brute force for short inputs, prefix sums otherwise.
inline std::vector<Picos> queue_closed_form(const std::vector<Picos>& x, const std::vector<Picos>& phi) {
  const std::size_t n = x.size();
  std::vector<Picos> out(n);
  if (n <= 2000) {
    for (std::size_t k = 0; k < n; ++k) {
      Picos best = INT64_MIN, tail = 0;
      for (std::size_t m = k + 1; m-- > 0;) {
        tail += phi[m];
        best = std::max(best, x[m] + tail);
      }
      out[k] = best;
    }
    return out;
  }
  Picos prefix = 0, best = INT64_MIN;  // best of x_m - P_{m-1}
  for (std::size_t k = 0; k < n; ++k) {
    best = std::max(best, x[k] - prefix);
    prefix += phi[k];
    out[k] = best + prefix;
  }
  return out;
}

inline HolEquivalence hol_equivalence_check(const std::vector<Picos>& tentatives, const std::vector<Picos>& phi) {
  if (tentatives.size() != phi.size()) throw DomainError("one processing time per packet");
  const auto direct = hol_release(tentatives, phi);
  const auto composed = fifo_queue(resequence_release(tentatives), phi);
  const auto closed = queue_closed_form(tentatives, phi);
  return {direct == composed, direct == closed};
}

}  // namespace damperlab
