// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"

using namespace damperlab;
using namespace damperlab::testing;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) ok = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (cond ? "" : " [x]");
  }
  void near(const char* what, double got, double want, double tol, double unit, const char* uname) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %.6g %s vs %.6g +- %.3g", what, got / unit, uname, want / unit, tol / unit);
    expect(std::abs(got - want) <= tol, buf);
  }
};

Check criterion1() {
  Check c;
  const auto p = example1();
  const auto b = theorem1_bounds(p.blocks[0]);
  c.near("D", b.d_upper, 257.13 * kUs, 10 * kNs, kUs, "us");
  c.near("V", b.jitter, 1.262 * kUs, 2 * kNs, kUs, "us");
  c.near("errors", b.breakdown.error_term, 200 * kNs, 1 * kNs, kNs, "ns");
  c.near("clocks", b.breakdown.clock_term, 62 * kNs, 1 * kNs, kNs, "ns");
  c.near("basic", b.breakdown.basic, 1.002 * kUs, 1 * kNs, kUs, "us");
  return c;
}

Check criterion2() {
  Check c;
  const auto e = example1().e2e();
  c.near("D", e.d_upper, 1.799 * kMs, 1 * kUs, kMs, "ms");
  c.near("V", e.jitter, 8.834 * kUs, 10 * kNs, kUs, "us");
  return c;
}

Check criterion3() {
  Check c;
  const auto e2 = example2().e2e();
  c.near("ex2 D", e2.d_upper, 34.211 * kMs, 1 * kUs, kMs, "ms");
  c.near("ex2 V", e2.jitter, 1.190 * kMs, 50 * kNs, kMs, "ms");
  const auto e3 = example3().e2e();
  c.near("ex3 D", e3.d_upper, 34.216 * kMs, 1 * kUs, kMs, "ms");
  c.near("ex3 V", e3.jitter, 21.74 * kUs, 50 * kNs, kUs, "us");
  c.near("ex3 errors", e3.breakdown.error_term, 5.8 * kUs, 50 * kNs, kUs, "us");
  c.near("ex3 clocks", e3.breakdown.clock_term, 6.92 * kUs, 50 * kNs, kUs, "us");
  c.near("ex3 basic", e3.breakdown.basic, 9.02 * kUs, 50 * kNs, kUs, "us");
  return c;
}

Check criterion4() {
  Check c;
  c.near("ex1 TE V", example1().te().jitter, 2.834 * kUs, 50 * kNs, kUs, "us");
  c.near("ex2 TE V", example2().te().jitter, 1.183 * kMs, 50 * kNs, kMs, "ms");
  c.near("ex3 TE V", example3().te().jitter, 13.74 * kUs, 50 * kNs, kUs, "us");
  return c;
}

double round_sig(double x, int sig) {
  const double mag = std::pow(10.0, sig - 1 - static_cast<int>(std::floor(std::log10(std::abs(x)))));
  return std::round(x * mag) / mag;
}

Check criterion5() {
  Check c;
  const auto wr = sync_threshold(2, 0, 0, ClockModel::white_rabbit()).simplified;
  const auto gp = sync_threshold(2, 0, 0, ClockModel::gptp()).simplified;
  const auto ntp = sync_threshold(2, 0, 0, ClockModel::ntp()).simplified;
  char buf[160];
  std::snprintf(buf, sizeof buf, "white rabbit %.5g ms vs 3.96 ms (3 s.f.)", wr / kMs);
  c.expect(round_sig(wr / kMs, 3) == round_sig(3.96, 3), buf);
  std::snprintf(buf, sizeof buf, "gptp %.5g ms vs 39.96 ms (3 s.f.)", gp / kMs);
  c.expect(round_sig(gp / kMs, 3) == round_sig(39.96, 3), buf);
  std::snprintf(buf, sizeof buf, "ntp %.5g s, table row left unreconciled", ntp);
  c.expect(true, buf);
  return c;
}

Check criterion6() {
  Check c;
  const Curve lb = Curve::leaky_bucket(2e6, 10000);
  const Seconds v = 1.262 * kUs;
  const Curve out = propagate_curve(lb, v);
  c.near("burst increase", out.envelope().burst - 10000, 2.524, 1e-9, 1, "B");
  const auto m = reorder_metrics(lb, v, 100);
  c.expect(m.rto == v, "RTO equals V exactly");
  c.near("RBO", m.rbo, 9902.524, 1e-9, 1, "B");
  c.expect(true, "listed RBO of 10003 B not reproduced by the formula");
  return c;
}

Check criterion7() {
  Check c;
  std::mt19937_64 rng(20240707);
  const DamperVariant vs[] = {DamperVariant::ideal, DamperVariant::tolerance, DamperVariant::tolerance,
                              DamperVariant::resequencing, DamperVariant::head_of_line};
  int violations = 0, blocks = 0, non_fifo = 0;
  std::size_t packets = 0;
  for (int i = 0; i < 100; ++i) {
    const DamperVariant v = vs[i % 5];
    const bool nf = v != DamperVariant::tolerance && v != DamperVariant::ideal && uni_int(rng, 0, 2) == 0;
    SimConfig s;
    s.block = random_block(rng, v, nf, random_clock(rng));
    s.source = random_source(rng);
    s.packets = 1000;
    s.seed = mix_seed(99, static_cast<std::uint64_t>(i));
    const auto rep = simulate_block(s);
    const auto vio = check_bounds(rep, select_bounds(s.block, s.source.alpha_packets()), rounding_slack(s.block));
    violations += static_cast<int>(vio.size());
    packets += rep.packets.size();
    non_fifo += nf;
    ++blocks;
  }
  c.expect(violations == 0, std::to_string(blocks) + " blocks (" + std::to_string(non_fifo) + " non-FIFO), " +
                                std::to_string(packets) + " packets, " + std::to_string(violations) + " violations");
  return c;
}

Check criterion8() {
  Check c;
  std::mt19937_64 rng(8080);
  int hits = 0, total = 0;
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const DamperVariant v = i % 3 == 0 ? DamperVariant::ideal : DamperVariant::tolerance;
    Block b = random_block(rng, v, false, ClockModel::ideal());
    b.clock = random_clock(rng, false);
    if (b.clock.rho == 1.0) b.clock.rho = 1.0 + 1e-4;
    for (auto t : {TightnessTarget::upper_drift, TightnessTarget::lower_drift, TightnessTarget::upper_sync,
                   TightnessTarget::lower_sync}) {
      Block x = b;
      const bool upper = t == TightnessTarget::upper_drift || t == TightnessTarget::upper_sync;
      if (t == TightnessTarget::upper_sync || t == TightnessTarget::lower_sync) {
        // omega chosen so that every interval of the trace sits on the synchronized branch
        Seconds min_delta = kInf;
        for (const auto& e : x.elements)
          if (const auto* j = std::get_if<JcsSpec>(&e)) min_delta = std::min(min_delta, j->delta);
        const Seconds lower_total = x.sum_delta() - x.sum_epsilon() - x.damper.delta_l;
        const Seconds target = 0.4 * std::min(min_delta, lower_total / (x.jcs_count() + 1));
        x.clock.omega = (x.clock.eta + (x.clock.rho - 1) * target) / 2;
      }
      const auto r = theorem1_bounds(x);
      const auto tr = tightness_trace(x, t);
      const double err = std::abs(tr.delay - (upper ? r.d_upper : r.d_lower));
      worst = std::max(worst, err);
      hits += err <= 1e-12;
      ++total;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d of %d traces within 1 ps of the bound (worst %.3g ps)", hits, total, worst * 1e12);
  c.expect(hits == total, buf);
  return c;
}

Check criterion9() {
  Check c;
  std::mt19937_64 rng(909);
  int equal = 0, closed = 0;
  const int traces = 10000;
  for (int i = 0; i < traces; ++i) {
    const int n = i % 1000 == 999 ? 5000 : uni_int(rng, 1, 120);
    const Picos phi_max = std::uniform_int_distribution<Picos>(0, 20000)(rng);
    std::vector<Picos> tent(static_cast<std::size_t>(n)), phi(static_cast<std::size_t>(n));
    Picos t = std::uniform_int_distribution<Picos>(-1000000, 1000000)(rng);
    for (int k = 0; k < n; ++k) {
      t += std::uniform_int_distribution<Picos>(0, 30000)(rng);
      tent[static_cast<std::size_t>(k)] = t + std::uniform_int_distribution<Picos>(-50000, 50000)(rng);
      phi[static_cast<std::size_t>(k)] = std::uniform_int_distribution<Picos>(0, phi_max)(rng);
    }
    const auto r = hol_equivalence_check(tent, phi);
    equal += r.composition_equal;
    closed += r.closed_form_equal;
  }
  c.expect(equal == traces, std::to_string(equal) + "/" + std::to_string(traces) + " recursion == re-sequencing + FIFO queue");
  c.expect(closed == traces, std::to_string(closed) + "/" + std::to_string(traces) + " closed form == recursion");
  return c;
}

Check criterion10() {
  Check c;
  RgcqExperiment x;
  x.trials = 10000;
  x.seed = 1010;
  const auto r = rgcq_reorder_experiment(x);
  char buf[160];
  std::snprintf(buf, sizeof buf, "rgcq symmetric frequency %.4f in [0.46, 0.54]", r.frequency);
  c.expect(r.frequency >= 0.46 && r.frequency <= 0.54, buf);
  for (double ratio : {0.0, 0.2, 0.5, 0.9}) {
    RcspExperiment y;
    y.tau_tai = ratio * y.delta_l;
    y.trials = 10000;
    y.seed = 1011;
    const auto q = rcsp_backtoback_experiment(y);
    std::snprintf(buf, sizeof buf, "rcsp tau/dl=%.1f back-to-back %.4f vs %.2f +- 0.03", ratio, q.p_backtoback, 1 - ratio);
    c.expect(std::abs(q.p_backtoback - (1 - ratio)) <= 0.03, buf);
  }
  return c;
}

Check criterion11() {
  Check c;
  const NetworkSpec net = orion_network();
  auto run = [&](DeploymentKind k, bool fifo) { return fixed_point(net, orion_deployment(k, fifo)); };
  const auto none = run(DeploymentKind::none, true);
  const auto rcsp = run(DeploymentKind::rcsp, true);
  const auto te = run(DeploymentKind::rgcq_te, true);
  const auto fop = run(DeploymentKind::fopleq, true);
  const auto hol = run(DeploymentKind::hol, true);
  const auto fop_nf = run(DeploymentKind::fopleq, false);
  const auto hol_nf = run(DeploymentKind::hol, false);
  bool conv = true;
  for (const auto* r : {&none, &rcsp, &te, &fop, &hol, &fop_nf, &hol_nf}) conv &= r->converged;
  c.expect(conv, "all fixed points converge");
  if (!conv) return c;
  bool same = true, within = true, below = true, above = true;
  double worst_rel = 0;
  for (std::size_t i = 0; i < net.flows.size(); ++i) {
    same &= fop.flows[i].jitter == rcsp.flows[i].jitter;
    // HoL carries theta - phi_min per block on top of its tolerance-only jitter
    within &= std::abs(hol.flows[i].jitter - te.flows[i].jitter) <= hol.flows[i].penalty;
    for (const auto* r : {&rcsp, &te, &fop, &hol}) below &= r->flows[i].jitter < none.flows[i].jitter;
    const double d_fop = fop_nf.flows[i].jitter - fop.flows[i].jitter;
    const double d_hol = hol_nf.flows[i].jitter - hol.flows[i].jitter;
    const double want_fop = fop_nf.flows[i].prefix_j, want_hol = 2 * hol_nf.flows[i].prefix_j;
    above &= d_fop > 0 && d_hol > 0;
    worst_rel = std::max({worst_rel, std::abs(d_fop - want_fop) / want_fop, std::abs(d_hol - want_hol) / want_hol});
  }
  c.expect(same, "FIFO fabrics: FOPLEQ jitter bit-identical to RCSP");
  c.expect(within, "HoL jitter within theta of RGCQ-TE");
  c.expect(below, "every damper deployment below the no-damper jitter");
  c.expect(above, "non-FIFO fabrics raise FOPLEQ and HoL jitter");
  char buf[160];
  std::snprintf(buf, sizeof buf, "increase matches J (FOPLEQ) and 2J (HoL) to %.2g relative (limit 1e-3)", worst_rel);
  c.expect(worst_rel <= 1e-3, buf);
  return c;
}

Check criterion12() {
  Check c;
  std::mt19937_64 rng(1212);
  // pseudo-inverse: curve(inv(k)+) >= k and monotone in k
  bool inv_ok = true;
  for (int i = 0; i < 200; ++i) {
    const Curve cs[] = {Curve::leaky_bucket(uni(rng, 1, 1e6), uni(rng, 0, 1e4)),
                        Curve::rate_latency(uni(rng, 1, 1e6), uni(rng, 0, 1e-3)),
                        Curve::staircase(uni_int(rng, 1, 5), uni(rng, 1e-6, 1e-2), uni_int(rng, 1, 5), Unit::bytes)};
    for (const auto& cv : cs) {
      double prev = 0;
      for (double k = 0.5; k < 40; k += 0.75) {
        const Seconds t = cv.lower_pseudo_inverse(k);
        inv_ok &= t >= prev && cv.eval_right(t) >= k * (1 - 1e-9);
        prev = t;
      }
    }
  }
  c.expect(inv_ok, "pseudo-inverse properties");

  // envelope membership of simulated releases per variant
  bool env_ok = true, order_ok = true;
  for (DamperVariant v : {DamperVariant::tolerance, DamperVariant::resequencing, DamperVariant::head_of_line}) {
    for (int i = 0; i < 6; ++i) {
      SimConfig s;
      s.block = random_block(rng, v, i % 2 == 1 && v != DamperVariant::tolerance, random_clock(rng));
      s.source = random_source(rng);
      s.packets = 400;
      s.seed = static_cast<std::uint64_t>(i + 1);
      const auto rep = simulate_block(s);
      const Picos dl = to_ps(s.block.damper.delta_l), du = to_ps(s.block.damper.delta_u);
      for (const auto& p : rep.packets) env_ok &= in_tolerance_envelope(p.e_theoretical, p.e_tentative, dl, du);
      if (v != DamperVariant::tolerance) {
        // aggregate order: exits never invert with respect to damper arrival
        std::vector<const PacketRecord*> by_arrival;
        for (const auto& p : rep.packets) by_arrival.push_back(&p);
        std::sort(by_arrival.begin(), by_arrival.end(), [](auto a, auto b) { return a->e_actual < b->e_actual; });
        for (std::size_t k = 1; k < by_arrival.size(); ++k) order_ok &= by_arrival[k - 1]->exit <= by_arrival[k]->exit;
      }
    }
  }
  c.expect(env_ok, "tentative releases inside the tolerance envelope");
  c.expect(order_ok, "re-sequencing and HoL releases keep aggregate order");

  // bounds are non-decreasing in delta, epsilon, delta_u and rho
  bool mono = true;
  for (int i = 0; i < 200; ++i) {
    Block b = random_block(rng, DamperVariant::tolerance, false, random_clock(rng));
    const auto base = theorem1_bounds(b);
    Block b2 = b;
    std::get<JcsSpec>(*std::find_if(b2.elements.begin(), b2.elements.end(), [](const Element& e) {
      return std::holds_alternative<JcsSpec>(e);
    })).epsilon += 1 * kNs;
    b2.damper.delta_u += 1 * kNs;
    b2.clock.rho += 1e-5;
    const auto r2 = theorem1_bounds(b2);
    mono &= r2.d_upper >= base.d_upper && r2.jitter >= base.jitter;
  }
  c.expect(mono, "argument monotonicity");

  // omega saturation: a huge omega gives the unsynchronized bounds, a tiny one caps psi at 2(X+1)omega
  bool sat = true;
  for (int i = 0; i < 200; ++i) {
    Block b = random_block(rng, DamperVariant::tolerance, false, random_clock(rng, false));
    const auto free_r = theorem1_bounds(b);
    b.clock.omega = 1e6;
    const auto big = theorem1_bounds(b);
    sat &= big.d_upper == free_r.d_upper && big.jitter == free_r.jitter;
    b.clock.omega = 1e-15;
    const auto tiny = theorem1_bounds(b);
    sat &= std::abs(tiny.psi_upper - 2 * (b.clock_count() + 1) * 1e-15) < 1e-24;
  }
  c.expect(sat, "omega saturation equivalence");

  // determinism
  SimConfig s;
  s.block = random_block(rng, DamperVariant::head_of_line, true, random_clock(rng));
  s.source = random_source(rng);
  s.packets = 500;
  s.seed = 4242;
  c.expect(simulate_block(s) == simulate_block(s), "identical seeds give identical reports");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0) only = std::atoi(argv[i + 1]);
  const std::vector<std::function<Check()>> all = {criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
                                                   criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};
  int failed = 0;
  for (int n = 1; n <= static_cast<int>(all.size()); ++n) {
    if (only && n != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = all[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s (%.2f s) %s\n", n, c.ok ? "PASS" : "FAIL", secs, c.detail.c_str());
    failed += !c.ok;
  }
  return failed ? 1 : 0;
}
