#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "units.hpp"

namespace damperlab {

enum class Unit { bytes, packets };

inline const char* to_string(Unit u) { return u == Unit::bytes ? "bytes" : "packets"; }

class Curve;

namespace shape {
struct LeakyBucket {
  double rate;   // units/s
  double burst;  // units
};
struct RateLatency {
  double rate;
  Seconds latency;
};
// b + inc * (ceil(t/P) - 1) for t > 0: left-continuous steps at multiples of P.
struct Staircase {
  double burst;
  Seconds period;
  double increment;
};
// inner(scale*t + offset) for t > 0, with the argument clamped at 0.
struct Shifted {
  std::shared_ptr<const Curve> inner;
  Seconds offset;
  double scale;
};
struct Min {
  std::shared_ptr<const Curve> left, right;
};
struct Sum {
  std::vector<std::shared_ptr<const Curve>> parts;
};
}  // namespace shape

// Affine upper bound: curve(t) <= burst + rate*t for t > 0.
struct Affine {
  double burst;
  double rate;
};

// Service lower bound: curve(t) >= rate*(t - latency) for t >= 0.
struct RateLatencyBound {
  double rate;
  Seconds latency;
};

// Non-decreasing curve with curve(0) = 0. Cheap to copy (shared immutable tree).
class Curve {
 public:
  using Rep = std::variant<shape::LeakyBucket, shape::RateLatency, shape::Staircase,
                           shape::Shifted, shape::Min, shape::Sum>;

  static Curve leaky_bucket(double rate, double burst, Unit u = Unit::bytes) {
    if (!(rate >= 0) || !(burst >= 0)) throw DomainError("leaky bucket needs rate, burst >= 0");
    return Curve(shape::LeakyBucket{rate, burst}, u);
  }
  static Curve rate_latency(double rate, Seconds latency, Unit u = Unit::bytes) {
    if (!(rate >= 0) || !(latency >= 0)) throw DomainError("rate-latency needs rate, latency >= 0");
    return Curve(shape::RateLatency{rate, latency}, u);
  }
  static Curve staircase(double burst, Seconds period, double increment, Unit u = Unit::packets) {
    if (!(burst >= 0) || !(period > 0) || !(increment >= 0))
      throw DomainError("staircase needs burst >= 0, period > 0, increment >= 0");
    return Curve(shape::Staircase{burst, period, increment}, u);
  }
  static Curve zero(Unit u = Unit::bytes) { return leaky_bucket(0, 0, u); }

  static Curve shifted(const Curve& inner, Seconds offset, double scale = 1.0) {
    if (!(scale > 0)) throw DomainError("shift scale must be positive");
    if (offset == 0 && scale == 1) return inner;
    return Curve(shape::Shifted{std::make_shared<Curve>(inner), offset, scale}, inner.unit_);
  }
  static Curve min(const Curve& a, const Curve& b) {
    if (a.unit_ != b.unit_) throw DomainError("min of curves with different units");
    return Curve(shape::Min{std::make_shared<Curve>(a), std::make_shared<Curve>(b)}, a.unit_);
  }
  static Curve sum(const std::vector<Curve>& parts, Unit u) {
    shape::Sum s;
    for (const auto& p : parts) {
      if (p.unit_ != u) throw DomainError("sum of curves with different units");
      s.parts.push_back(std::make_shared<Curve>(p));
    }
    return Curve(std::move(s), u);
  }

  Unit unit() const { return unit_; }
  const Rep& rep() const { return *rep_; }

  double operator()(Seconds t) const { return eval(t); }

  double eval(Seconds t) const {
    if (!(t >= 0)) throw DomainError("curve evaluated at negative time");
    if (t == 0) return 0.0;
    return eval_pos(t);
  }

  // lim_{s -> t+} curve(s)
  double eval_right(Seconds t) const {
    if (!(t >= 0)) throw DomainError("curve evaluated at negative time");
    return std::visit([&](const auto& c) { return right_of(c, t); }, *rep_);
  }

  // inf { t >= 0 | curve(t) >= k }, +inf if never reached
  Seconds lower_pseudo_inverse(double k) const {
    if (!(k >= 0)) throw DomainError("pseudo-inverse of negative quantity");
    if (k == 0) return 0.0;
    return std::visit([&](const auto& c) { return inverse_of(c, k); }, *rep_);
  }

  double sustained_rate() const {
    return std::visit([&](const auto& c) { return rate_of(c); }, *rep_);
  }

  Affine envelope() const {
    return std::visit([&](const auto& c) { return envelope_of(c); }, *rep_);
  }

  RateLatencyBound service_lower_bound() const {
    return std::visit([&](const auto& c) { return lower_of(c); }, *rep_);
  }

  // Largest step period anywhere in the tree (0 if none).
  Seconds max_period() const {
    return std::visit([&](const auto& c) { return period_of(c); }, *rep_);
  }

  // Points in [0, horizon] where the curve may jump or change slope.
  std::vector<Seconds> breakpoints(Seconds horizon) const {
    std::vector<Seconds> out{0.0};
    std::visit([&](const auto& c) { collect(c, horizon, out); }, *rep_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  Curve(Rep r, Unit u) : rep_(std::make_shared<Rep>(std::move(r))), unit_(u) {}

  static constexpr std::size_t kMaxBreakpoints = 4000000;

  // ceil(q) with near-integer snapping so that t = n*P lands on step n.
  static double snapped_ceil(double q) {
    double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q))) return r;
    return std::ceil(q);
  }
  static double snapped_floor(double q) {
    double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q))) return r;
    return std::floor(q);
  }

  double eval_pos(Seconds t) const {
    return std::visit([&](const auto& c) { return value_of(c, t); }, *rep_);
  }

  // --- evaluation at t > 0
  static double value_of(const shape::LeakyBucket& c, Seconds t) { return c.burst + c.rate * t; }
  static double value_of(const shape::RateLatency& c, Seconds t) { return c.rate * pos(t - c.latency); }
  static double value_of(const shape::Staircase& c, Seconds t) {
    // t > 0 is always on step 1 or later, even when t/P snaps to 0
    return c.burst + c.increment * (std::max(1.0, snapped_ceil(t / c.period)) - 1.0);
  }
  static double value_of(const shape::Shifted& c, Seconds t) {
    double a = c.scale * t + c.offset;
    return a <= 0 ? 0.0 : c.inner->eval_pos(a);
  }
  static double value_of(const shape::Min& c, Seconds t) {
    return std::min(c.left->eval_pos(t), c.right->eval_pos(t));
  }
  static double value_of(const shape::Sum& c, Seconds t) {
    double s = 0;
    for (const auto& p : c.parts) s += p->eval_pos(t);
    return s;
  }

  // --- right limits at t >= 0
  static double right_of(const shape::LeakyBucket& c, Seconds t) { return c.burst + c.rate * t; }
  static double right_of(const shape::RateLatency& c, Seconds t) { return c.rate * pos(t - c.latency); }
  static double right_of(const shape::Staircase& c, Seconds t) {
    return c.burst + c.increment * snapped_floor(t / c.period);
  }
  static double right_of(const shape::Shifted& c, Seconds t) {
    double a = c.scale * t + c.offset;
    return a < 0 ? 0.0 : c.inner->eval_right(a);
  }
  static double right_of(const shape::Min& c, Seconds t) {
    return std::min(c.left->eval_right(t), c.right->eval_right(t));
  }
  static double right_of(const shape::Sum& c, Seconds t) {
    double s = 0;
    for (const auto& p : c.parts) s += p->eval_right(t);
    return s;
  }

  // --- lower pseudo-inverse for k > 0
  static Seconds inverse_of(const shape::LeakyBucket& c, double k) {
    if (k <= c.burst) return 0.0;
    return c.rate > 0 ? (k - c.burst) / c.rate : kInf;
  }
  static Seconds inverse_of(const shape::RateLatency& c, double k) {
    return c.rate > 0 ? c.latency + k / c.rate : kInf;
  }
  static Seconds inverse_of(const shape::Staircase& c, double k) {
    if (k <= c.burst) return 0.0;
    if (c.increment <= 0) return kInf;
    return snapped_ceil((k - c.burst) / c.increment) * c.period;
  }
  static Seconds inverse_of(const shape::Shifted& c, double k) {
    Seconds u = c.inner->lower_pseudo_inverse(k);
    if (std::isinf(u)) return kInf;
    return pos((u - c.offset) / c.scale);
  }
  static Seconds inverse_of(const shape::Min& c, double k) {
    return std::max(c.left->lower_pseudo_inverse(k), c.right->lower_pseudo_inverse(k));
  }
  Seconds inverse_of(const shape::Sum&, double k) const {
    // bisection on the non-decreasing sum
    if (eval_right(0) >= k) return 0.0;
    Seconds hi = std::max(1e-9, max_period());
    int grow = 0;
    while (eval_pos(hi) < k) {
      hi *= 2;
      if (++grow > 200) return kInf;
    }
    Seconds lo = 0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
      Seconds mid = 0.5 * (lo + hi);
      if (mid > 0 && eval_pos(mid) >= k) hi = mid; else lo = mid;
    }
    return hi;
  }

  // --- long-term rate
  static double rate_of(const shape::LeakyBucket& c) { return c.rate; }
  static double rate_of(const shape::RateLatency& c) { return c.rate; }
  static double rate_of(const shape::Staircase& c) { return c.increment / c.period; }
  static double rate_of(const shape::Shifted& c) { return c.inner->sustained_rate() * c.scale; }
  static double rate_of(const shape::Min& c) {
    return std::min(c.left->sustained_rate(), c.right->sustained_rate());
  }
  static double rate_of(const shape::Sum& c) {
    double s = 0;
    for (const auto& p : c.parts) s += p->sustained_rate();
    return s;
  }

  // --- affine upper envelopes
  static Affine envelope_of(const shape::LeakyBucket& c) { return {c.burst, c.rate}; }
  static Affine envelope_of(const shape::RateLatency& c) { return {0.0, c.rate}; }
  static Affine envelope_of(const shape::Staircase& c) { return {c.burst, c.increment / c.period}; }
  static Affine envelope_of(const shape::Shifted& c) {
    Affine in = c.inner->envelope();
    return {in.burst + in.rate * pos(c.offset), in.rate * c.scale};
  }
  static Affine envelope_of(const shape::Min& c) {
    Affine a = c.left->envelope(), b = c.right->envelope();
    if (a.rate != b.rate) return a.rate < b.rate ? a : b;
    return a.burst <= b.burst ? a : b;
  }
  static Affine envelope_of(const shape::Sum& c) {
    Affine s{0, 0};
    for (const auto& p : c.parts) {
      Affine e = p->envelope();
      s.burst += e.burst;
      s.rate += e.rate;
    }
    return s;
  }

  // --- rate-latency lower bounds
  static RateLatencyBound lower_of(const shape::LeakyBucket& c) { return {c.rate, 0.0}; }
  static RateLatencyBound lower_of(const shape::RateLatency& c) { return {c.rate, c.latency}; }
  static RateLatencyBound lower_of(const shape::Staircase& c) {
    return {c.increment / c.period, c.burst >= c.increment ? 0.0 : c.period};
  }
  static RateLatencyBound lower_of(const shape::Shifted& c) {
    RateLatencyBound in = c.inner->service_lower_bound();
    return {in.rate * c.scale, pos((in.latency - c.offset) / c.scale)};
  }
  static RateLatencyBound lower_of(const shape::Min& c) {
    RateLatencyBound a = c.left->service_lower_bound(), b = c.right->service_lower_bound();
    return {std::min(a.rate, b.rate), std::max(a.latency, b.latency)};
  }
  static RateLatencyBound lower_of(const shape::Sum& c) {
    RateLatencyBound s{0, 0};
    for (const auto& p : c.parts) {
      RateLatencyBound e = p->service_lower_bound();
      s.rate += e.rate;
      s.latency = std::max(s.latency, e.latency);
    }
    return s;
  }

  static Seconds period_of(const shape::LeakyBucket&) { return 0; }
  static Seconds period_of(const shape::RateLatency&) { return 0; }
  static Seconds period_of(const shape::Staircase& c) { return c.period; }
  static Seconds period_of(const shape::Shifted& c) { return c.inner->max_period() / c.scale; }
  static Seconds period_of(const shape::Min& c) {
    return std::max(c.left->max_period(), c.right->max_period());
  }
  static Seconds period_of(const shape::Sum& c) {
    Seconds m = 0;
    for (const auto& p : c.parts) m = std::max(m, p->max_period());
    return m;
  }

  // --- breakpoints
  static void collect(const shape::LeakyBucket&, Seconds, std::vector<Seconds>&) {}
  static void collect(const shape::RateLatency& c, Seconds h, std::vector<Seconds>& out) {
    if (c.latency <= h) out.push_back(c.latency);
  }
  static void collect(const shape::Staircase& c, Seconds h, std::vector<Seconds>& out) {
    double n = std::floor(h / c.period);
    if (n > static_cast<double>(kMaxBreakpoints)) throw DomainError("breakpoint horizon too large");
    for (double i = 1; i <= n; ++i) out.push_back(i * c.period);
  }
  static void collect(const shape::Shifted& c, Seconds h, std::vector<Seconds>& out) {
    Seconds zero_at = -c.offset / c.scale;
    if (zero_at > 0 && zero_at <= h) out.push_back(zero_at);
    for (Seconds u : c.inner->breakpoints(c.scale * h + c.offset)) {
      Seconds t = (u - c.offset) / c.scale;
      if (t >= 0 && t <= h) out.push_back(t);
    }
  }
  static void collect(const shape::Min& c, Seconds h, std::vector<Seconds>& out) {
    std::vector<Seconds> pts = c.left->breakpoints(h);
    auto rb = c.right->breakpoints(h);
    pts.insert(pts.end(), rb.begin(), rb.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    pts.push_back(h);
    // children are affine between consecutive points: add sign changes of their difference
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      Seconds a = pts[i], b = pts[i + 1];
      if (b <= a) continue;
      double da = c.left->eval_right(a) - c.right->eval_right(a);
      double db = c.left->eval_pos(b) - c.right->eval_pos(b);
      if ((da < 0 && db > 0) || (da > 0 && db < 0)) out.push_back(a + (b - a) * da / (da - db));
    }
    out.insert(out.end(), pts.begin(), pts.end() - 1);
  }
  static void collect(const shape::Sum& c, Seconds h, std::vector<Seconds>& out) {
    for (const auto& p : c.parts) {
      auto b = p->breakpoints(h);
      out.insert(out.end(), b.begin(), b.end());
    }
  }

  std::shared_ptr<const Rep> rep_;
  Unit unit_;
};

namespace detail {

inline double deviation_at(const Curve& a, const Curve& b, Seconds t, double& best) {
  double v = std::max(b.lower_pseudo_inverse(a.eval(t)), b.lower_pseudo_inverse(a.eval_right(t))) - t;
  best = std::max(best, v);
  return v;
}

}  // namespace detail

// sup_t { beta_down(alpha(t)) - t }; +inf when the arrival outpaces the service.
inline Seconds horizontal_deviation(const Curve& arrival, const Curve& service) {
  if (arrival.unit() != service.unit()) throw DomainError("horizontal deviation between different units");
  Affine env = arrival.envelope();
  RateLatencyBound svc = service.service_lower_bound();
  double r = arrival.sustained_rate();
  if (r > svc.rate * (1 + 1e-12) || (svc.rate == 0 && r > 0)) return kInf;

  Seconds period = std::max(arrival.max_period(), service.max_period());
  Seconds horizon = std::max({svc.latency, 1e-9}) + 4 * period;
  double best = -kInf;
  for (int round = 0; round < 64; ++round) {
    best = -kInf;
    auto pts = arrival.breakpoints(horizon);
    for (Seconds sb : service.breakpoints(horizon + svc.latency + env.burst / std::max(svc.rate, 1e-300))) {
      for (double k : {service.eval(sb), service.eval_right(sb)}) {
        Seconds p = arrival.lower_pseudo_inverse(k);
        if (p <= horizon) pts.push_back(p);
      }
    }
    for (Seconds t : pts) detail::deviation_at(arrival, service, t, best);
    // Beyond t the envelope caps the deviation at latency + (B + r t)/R - t.
    if (env.rate >= svc.rate) break;  // equal rates: periodic pattern already covered by the horizon
    double slope = 1.0 - env.rate / svc.rate;
    Seconds t_stop = (svc.latency + env.burst / svc.rate - best) / slope;
    if (t_stop <= horizon) break;
    horizon = std::max(2 * horizon, t_stop * (1 + 1e-9));
  }
  return best;
}

}  // namespace damperlab
