#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clocks.hpp"
#include "curves.hpp"
#include "dampers.hpp"
#include "errors.hpp"
#include "units.hpp"

namespace damperlab {

// Jitter-compensated system: delay <= delta in its own clock; header update error <= epsilon.
struct JcsSpec {
  Seconds delta = 0;
  Seconds epsilon = 0;
  bool fifo = true;
  std::string clock_id;
  Seconds delta_min = 0;  // optional local-time lower bound, only used for prefix jitter
};

// Bounded-delay system, all in TAI.
struct BdsSpec {
  Seconds pi_lower = 0;
  Seconds pi_upper = 0;
  Seconds nu = 0;
  bool fifo = true;
};

using Element = std::variant<JcsSpec, BdsSpec>;

struct Block {
  std::string id;
  std::vector<Element> elements;
  DamperSpec damper;
  ClockModel clock;
  std::optional<int> distinct_clock_count;  // X; defaults to the number of JCSs

  int jcs_count() const {
    int k = 0;
    for (const auto& e : elements) k += std::holds_alternative<JcsSpec>(e);
    return k;
  }
  int clock_count() const { return distinct_clock_count.value_or(jcs_count()); }

  Seconds sum_delta() const { return sum_jcs([](const JcsSpec& j) { return j.delta; }); }
  Seconds sum_epsilon() const { return sum_jcs([](const JcsSpec& j) { return j.epsilon; }); }
  Seconds sum_pi_upper() const { return sum_bds([](const BdsSpec& b) { return b.pi_upper; }); }
  Seconds sum_pi_lower() const { return sum_bds([](const BdsSpec& b) { return b.pi_lower; }); }
  Seconds sum_nu() const { return sum_bds([](const BdsSpec& b) { return b.nu; }); }

  bool all_fifo() const {
    for (const auto& e : elements)
      if (!std::visit([](const auto& x) { return x.fifo; }, e)) return false;
    return true;
  }

  void validate() const {
    damper.validate();
    clock.validate();
    for (const auto& e : elements) {
      if (const auto* j = std::get_if<JcsSpec>(&e)) {
        if (!(j->delta >= 0) || !(j->epsilon >= 0)) throw ConfigError("JCS needs delta, epsilon >= 0");
        if (!(j->delta_min >= 0) || j->delta_min > j->delta) throw ConfigError("JCS needs 0 <= delta_min <= delta");
      } else {
        const auto& b = std::get<BdsSpec>(e);
        if (!(b.pi_lower >= 0) || b.pi_upper < b.pi_lower || !(b.nu >= 0))
          throw ConfigError("BDS needs 0 <= pi_lower <= pi_upper and nu >= 0");
      }
    }
    if (distinct_clock_count && (*distinct_clock_count < 0 || *distinct_clock_count > jcs_count()))
      throw ConfigError("distinct clock count must be within [0, K]");
  }

 private:
  template <typename F>
  Seconds sum_jcs(F f) const {
    Seconds s = 0;
    for (const auto& e : elements)
      if (const auto* j = std::get_if<JcsSpec>(&e)) s += f(*j);
    return s;
  }
  template <typename F>
  Seconds sum_bds(F f) const {
    Seconds s = 0;
    for (const auto& e : elements)
      if (const auto* b = std::get_if<BdsSpec>(&e)) s += f(*b);
    return s;
  }
};

struct Breakdown {
  Seconds basic = 0;        // BDS jitter plus damper tolerances
  Seconds error_term = 0;   // twice the header errors
  Seconds clock_term = 0;   // psi_upper + psi_lower
  Seconds penalty = 0;      // head-of-line and non-FIFO additions
};

struct BoundsResult {
  Seconds d_upper = 0;
  Seconds d_lower = 0;
  Seconds jitter = 0;
  Seconds psi_upper = 0;
  Seconds psi_lower = 0;
  Breakdown breakdown;
  std::string theorem;
};

struct PsiTerms {
  Seconds upper;
  Seconds lower;
};

inline PsiTerms psi_terms(const Block& b) {
  const ClockModel& c = b.clock;
  const double k1 = b.jcs_count() + 1.0;
  const double x1 = b.clock_count() + 1.0;
  const Seconds sd = b.sum_delta(), se = b.sum_epsilon();
  Seconds up = sync_cap((c.rho - 1) * (b.damper.delta_u + sd + se) + k1 * c.eta, c.omega, x1);
  Seconds lo = sync_cap((1 - 1 / c.rho) * (-b.damper.delta_l + sd - se) + k1 * c.eta / c.rho, c.omega, x1);
  return {up, lo};
}

namespace detail {

inline BoundsResult tolerance_bounds(const Block& b, const char* name) {
  b.validate();
  PsiTerms psi = psi_terms(b);
  const Seconds sd = b.sum_delta(), se = b.sum_epsilon();
  BoundsResult r;
  r.psi_upper = psi.upper;
  r.psi_lower = psi.lower;
  r.d_upper = sd + b.sum_pi_upper() + b.damper.delta_u + se + psi.upper;
  r.d_lower = sd + b.sum_pi_lower() - b.damper.delta_l - se - psi.lower;
  r.breakdown.basic = b.sum_nu() + b.damper.delta_u + b.damper.delta_l;
  r.breakdown.error_term = 2 * se;
  r.breakdown.clock_term = psi.upper + psi.lower;
  r.jitter = r.breakdown.basic + r.breakdown.error_term + r.breakdown.clock_term;
  r.theorem = name;
  return r;
}

}  // namespace detail

// Damper with tolerances (or ideal) terminating a block of JCSs and BDSs.
inline BoundsResult theorem1_bounds(const Block& b) {
  if (b.damper.variant != DamperVariant::ideal && b.damper.variant != DamperVariant::tolerance)
    throw ContractError("theorem 1 covers ideal and tolerance dampers; use theorem 3/4 for FIFO-constrained ones");
  return detail::tolerance_bounds(b, "theorem1");
}

// Re-sequencing damper, every element FIFO: same bounds as the tolerance damper.
inline BoundsResult theorem3_bounds(const Block& b) {
  if (b.damper.variant != DamperVariant::resequencing) throw ContractError("theorem 3 needs a re-sequencing damper");
  if (!b.all_fifo()) throw ContractError("non-FIFO element in block; use theorem 5");
  return detail::tolerance_bounds(b, "theorem3");
}

// Worst-case wait in a single-server FIFO queue with service time <= phi_max fed by alpha(t + v):
// max_k { k*phi_max - alpha_down(k) } + v
inline Seconds hol_theta(const Curve& alpha_packets, Seconds phi_max, Seconds v) {
  if (alpha_packets.unit() != Unit::packets) throw DomainError("theta needs a per-packet arrival curve");
  if (!(phi_max >= 0) || !(v >= 0)) throw DomainError("theta needs phi_max, v >= 0");
  if (phi_max == 0) return v;
  Affine env = alpha_packets.envelope();
  if (env.rate * phi_max >= 1.0) return kInf;  // queue never drains
  const double slope = phi_max - (env.rate > 0 ? 1.0 / env.rate : kInf);
  double best = -kInf;
  for (long k = 1;; ++k) {
    const double kd = static_cast<double>(k);
    Seconds inv = alpha_packets.lower_pseudo_inverse(kd);
    if (std::isfinite(inv)) best = std::max(best, kd * phi_max - inv);
    // for k > burst: alpha_down(k) >= (k - B)/r, so the term is below k*slope + B/r
    if (kd > env.burst) {
      double cap = env.rate > 0 ? kd * slope + env.burst / env.rate : -kInf;
      if (cap < best || !std::isfinite(inv)) break;
    }
    if (k > 50000000) throw DomainError("theta search did not terminate");
  }
  return best + v;
}

// Head-of-line damper, every element FIFO.
inline BoundsResult theorem4_bounds(const Block& b, const Curve& alpha_packets) {
  if (b.damper.variant != DamperVariant::head_of_line) throw ContractError("theorem 4 needs a head-of-line damper");
  if (!b.all_fifo()) throw ContractError("non-FIFO element in block; use theorem 6");
  BoundsResult r = detail::tolerance_bounds(b, "theorem4");
  if (b.damper.phi_max == 0) return r;
  const Seconds theta = hol_theta(alpha_packets, b.damper.phi_max, r.jitter);
  r.d_upper += theta;
  r.d_lower += b.damper.phi_min;
  r.jitter += theta - b.damper.phi_min;
  r.breakdown.penalty += theta - b.damper.phi_min;
  return r;
}

// Re-sequencing damper behind a non-FIFO element; j is the jitter up to the last non-FIFO element.
inline BoundsResult theorem5_bounds(const Block& b, Seconds j) {
  if (b.damper.variant != DamperVariant::resequencing) throw ContractError("theorem 5 needs a re-sequencing damper");
  if (!(j >= 0)) throw DomainError("prefix jitter must be >= 0");
  BoundsResult r = detail::tolerance_bounds(b, "theorem5");
  r.d_upper += j;
  r.jitter += j;
  r.breakdown.penalty += j;
  return r;
}

// Head-of-line damper behind a non-FIFO element.
inline BoundsResult theorem6_bounds(const Block& b, Seconds j, const Curve& alpha_packets) {
  if (b.damper.variant != DamperVariant::head_of_line) throw ContractError("theorem 6 needs a head-of-line damper");
  if (!(j >= 0)) throw DomainError("prefix jitter must be >= 0");
  BoundsResult r = detail::tolerance_bounds(b, "theorem6");
  Seconds add = j;
  if (b.damper.phi_max > 0) {
    const Seconds theta = hol_theta(alpha_packets, b.damper.phi_max, r.jitter);
    r.d_upper += theta;
    r.d_lower += b.damper.phi_min;
    r.jitter += theta - b.damper.phi_min;
    r.breakdown.penalty += theta - b.damper.phi_min;
    add = 2 * j;
  }
  r.d_upper += add;
  r.jitter += add;
  r.breakdown.penalty += add;
  return r;
}

inline std::optional<std::size_t> last_non_fifo_index(const Block& b) {
  std::optional<std::size_t> idx;
  for (std::size_t i = 0; i < b.elements.size(); ++i)
    if (!std::visit([](const auto& x) { return x.fifo; }, b.elements[i])) idx = i;
  return idx;
}

// TAI delay spread from the block entrance through element e, using the raw element delays:
// a JCS spans [delta_min, delta] locally, widened by the clock deviation bounds; a BDS spans nu.
inline Seconds prefix_jitter(const Block& b, std::size_t e_index) {
  if (e_index >= b.elements.size()) throw DomainError("prefix index outside the block");
  Seconds j = 0;
  for (std::size_t i = 0; i <= e_index; ++i) {
    if (const auto* s = std::get_if<JcsSpec>(&b.elements[i])) {
      Interval hi = delay_deviation_bounds(s->delta, b.clock);
      Interval lo = delay_deviation_bounds(s->delta_min, b.clock);
      j += (s->delta + hi.hi) - pos(s->delta_min + lo.lo);
    } else {
      j += std::get<BdsSpec>(b.elements[i]).nu;
    }
  }
  return j;
}

// Jitter the prefix would have behind an ideal damper (tolerance-free damper-output jitter of the prefix).
inline Seconds prefix_jitter_compensated(const Block& b, std::size_t e_index) {
  if (e_index >= b.elements.size()) throw DomainError("prefix index outside the block");
  Block p;
  p.elements.assign(b.elements.begin(), b.elements.begin() + static_cast<std::ptrdiff_t>(e_index) + 1);
  p.clock = b.clock;
  p.damper = presets::ideal();
  if (b.distinct_clock_count) p.distinct_clock_count = std::min(*b.distinct_clock_count, p.jcs_count());
  return detail::tolerance_bounds(p, "prefix").jitter;
}

// Picks the theorem matching the block shape.
inline BoundsResult select_bounds(const Block& b, const std::optional<Curve>& alpha_packets = std::nullopt,
                                  std::optional<Seconds> j = std::nullopt) {
  auto need_alpha = [&]() -> const Curve& {
    if (!alpha_packets) throw ConfigError("head-of-line damper needs a per-packet arrival curve");
    return *alpha_packets;
  };
  auto jitter_prefix = [&]() {
    if (j) return *j;
    return prefix_jitter(b, *last_non_fifo_index(b));
  };
  switch (b.damper.variant) {
    case DamperVariant::ideal:
    case DamperVariant::tolerance: return theorem1_bounds(b);
    case DamperVariant::resequencing: return b.all_fifo() ? theorem3_bounds(b) : theorem5_bounds(b, jitter_prefix());
    case DamperVariant::head_of_line:
      if (b.all_fifo()) return theorem4_bounds(b, b.damper.phi_max > 0 ? need_alpha() : Curve::zero(Unit::packets));
      return theorem6_bounds(b, jitter_prefix(), b.damper.phi_max > 0 ? need_alpha() : Curve::zero(Unit::packets));
  }
  throw ContractError("unknown damper variant");
}

using PathPart = std::variant<BoundsResult, BdsSpec>;

// Concatenation: delays and jitters add up block by block.
inline BoundsResult e2e_sum(const std::vector<PathPart>& parts) {
  if (parts.empty()) throw DomainError("empty path");
  BoundsResult s;
  s.theorem = "sum";
  for (const auto& p : parts) {
    if (const auto* r = std::get_if<BoundsResult>(&p)) {
      s.d_upper += r->d_upper;
      s.d_lower += r->d_lower;
      s.jitter += r->jitter;
      s.psi_upper += r->psi_upper;
      s.psi_lower += r->psi_lower;
      s.breakdown.basic += r->breakdown.basic;
      s.breakdown.error_term += r->breakdown.error_term;
      s.breakdown.clock_term += r->breakdown.clock_term;
      s.breakdown.penalty += r->breakdown.penalty;
    } else {
      const auto& b = std::get<BdsSpec>(p);
      s.d_upper += b.pi_upper;
      s.d_lower += b.pi_lower;
      s.jitter += b.nu;
      s.breakdown.basic += b.nu;
    }
  }
  return s;
}

// Most pessimistic clock over a path: used when blocks declare different models.
inline ClockModel envelope_clock(const std::vector<Block>& blocks) {
  ClockModel c{1.0, 0.0, 0.0};
  for (const auto& b : blocks) {
    c.rho = std::max(c.rho, b.clock.rho);
    c.eta = std::max(c.eta, b.clock.eta);
    c.omega = std::max(c.omega, b.clock.omega);
  }
  if (blocks.empty()) c.omega = kInf;
  return c;
}

// End-to-end bounds with TE time-stamping over N concatenated blocks (M JCSs in total).
// Trailing BDSs after the last damper may be passed in `tail`.
inline BoundsResult theorem2_te_bounds(const std::vector<Block>& blocks, const std::vector<BdsSpec>& tail = {},
                                       std::optional<ClockModel> clock = std::nullopt) {
  if (blocks.empty()) throw DomainError("empty path");
  Seconds delta = 0, eps = 0, pi_up = 0, pi_lo = 0, nu = 0, du_all = 0, du_head = 0;
  int m = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    b.validate();
    if (b.damper.header_mode != HeaderMode::te_stamping)
      throw ContractError("block '" + b.id + "' does not use TE time-stamping");
    if (b.damper.fifo_constrained()) throw ContractError("TE path bounds cover dampers with tolerances");
    delta += b.sum_delta();
    eps += b.sum_epsilon();
    pi_up += b.sum_pi_upper();
    pi_lo += b.sum_pi_lower();
    nu += b.sum_nu();
    m += b.jcs_count();
    du_all += b.damper.delta_u;
    if (i + 1 < blocks.size()) du_head += b.damper.delta_u;
  }
  for (const auto& t : tail) {
    pi_up += t.pi_upper;
    pi_lo += t.pi_lower;
    nu += t.nu;
  }
  const ClockModel c = clock.value_or(envelope_clock(blocks));
  const DamperSpec& last = blocks.back().damper;
  const double mn = m + static_cast<double>(blocks.size());
  BoundsResult r;
  r.theorem = "theorem2";
  r.psi_upper = sync_cap((c.rho - 1) * (delta + du_all + eps) + mn * c.eta, c.omega, mn);
  r.psi_lower = sync_cap((1 - 1 / c.rho) * (delta - last.delta_l + du_head + eps) + mn * c.eta / c.rho, c.omega, mn);
  r.d_upper = delta + pi_up + du_all + eps + r.psi_upper;
  r.d_lower = delta + pi_lo + du_head - last.delta_l - eps - r.psi_lower;
  r.breakdown.basic = nu + last.delta_u + last.delta_l;
  r.breakdown.error_term = 2 * eps;
  r.breakdown.clock_term = r.psi_upper + r.psi_lower;
  r.jitter = r.breakdown.basic + r.breakdown.error_term + r.breakdown.clock_term;
  return r;
}

struct SyncThreshold {
  Seconds exact;       // (K+1)/(rho-1) * (2 omega - eta) - delta_u - K eps
  Seconds simplified;  // 2 (2 omega - eta)/(rho-1)
};

// Sum of JCS delay bounds above which synchronization with time-error bound omega starts to help.
inline SyncThreshold sync_threshold(int k, Seconds delta_u, Seconds epsilon, const ClockModel& c) {
  if (k < 0) throw DomainError("negative JCS count");
  if (c.rho == 1.0 || std::isinf(c.omega)) return {kInf, kInf};
  const double r1 = c.rho - 1;
  return {(k + 1) / r1 * (2 * c.omega - c.eta) - delta_u - k * epsilon, 2 * (2 * c.omega - c.eta) / r1};
}

// Arrival curve at the damper output: alpha(t + v).
inline Curve propagate_curve(const Curve& alpha, Seconds v) {
  if (!(v >= 0)) throw DomainError("negative jitter");
  if (const auto* lb = std::get_if<shape::LeakyBucket>(&alpha.rep()))
    return Curve::leaky_bucket(lb->rate, lb->burst + lb->rate * v, alpha.unit());
  return Curve::shifted(alpha, v, 1.0);
}

struct ReorderMetrics {
  Seconds rto;  // re-sequencing timeout
  double rbo;   // re-sequencing buffer size, bytes
};

inline ReorderMetrics reorder_metrics(const Curve& alpha, Seconds v, double l_min) {
  if (!(v >= 0)) throw DomainError("negative jitter");
  if (!(l_min > 0)) throw DomainError("minimum packet length must be positive");
  if (alpha.unit() != Unit::bytes) throw DomainError("reordering metrics need a byte arrival curve");
  return {pos(v - alpha.lower_pseudo_inverse(2 * l_min)), pos(alpha.eval_right(v) - l_min)};
}

}  // namespace damperlab
