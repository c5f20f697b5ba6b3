#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace damperlab;
using namespace damperlab::testing;
using Catch::Approx;

TEST_CASE("presets carry the tolerance of their rounding law") {
  const DamperSpec r = presets::rcsp(998 * kNs, 2 * kNs);
  CHECK(r.delta_l == Approx(1000 * kNs));
  CHECK(r.delta_u == Approx(2 * kNs));
  const DamperSpec g = presets::rgcq(998 * kNs, 2 * kNs);
  CHECK(g.delta_l == Approx(2 * kNs));
  CHECK(g.delta_u == Approx(1000 * kNs));
  CHECK(presets::fopleq(1e-6, 1e-9).fifo_constrained());
  CHECK_FALSE(r.fifo_constrained());
  CHECK_THROWS_AS((DamperSpec{DamperVariant::ideal, 1e-6}).validate(), ConfigError);
  CHECK_THROWS_AS(presets::hol(0, 0, 2e-9, 1e-9).validate(), ConfigError);
}

TEST_CASE("quantize snaps exact multiples and rounds the rest") {
  const DamperSpec f = presets::rcsp(1 * kUs, 0), c = presets::rgcq(1 * kUs, 0);
  CHECK(quantize(3 * kUs, f) == Approx(3 * kUs));
  CHECK(quantize(3 * kUs, c) == Approx(3 * kUs));
  CHECK(quantize(3.4 * kUs, f) == Approx(3 * kUs));
  CHECK(quantize(3.4 * kUs, c) == Approx(4 * kUs));
  CHECK(quantize(Picos{3400}, Rounding::floor, Picos{1000}) == 3000);
  CHECK(quantize(Picos{-3400}, Rounding::floor, Picos{1000}) == -4000);
  CHECK(quantize(Picos{3400}, Rounding::ceil, Picos{1000}) == 4000);
  CHECK_THROWS_AS(quantize(1.0, presets::sced_plus(1e-6, 1e-9)), ConfigError);
}

TEST_CASE("rounding laws stay inside the tolerance envelope") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20000; ++i) {
    const Picos grid = uni_int(rng, 100, 2000000), eps = uni_int(rng, 0, 50000);
    const Picos e = std::uniform_int_distribution<Picos>(-kPsPerMs, kPsPerMs)(rng);
    const DamperSpec r = presets::rcsp(from_ps(grid), from_ps(eps)), g = presets::rgcq(from_ps(grid), from_ps(eps));
    const Picos jitter = std::uniform_int_distribution<Picos>(-eps, eps)(rng);
    const Picos fr = quantize(e + jitter, Rounding::floor, grid), cr = quantize(e + jitter, Rounding::ceil, grid);
    REQUIRE(in_tolerance_envelope(e, fr, to_ps(r.delta_l), to_ps(r.delta_u)));
    REQUIRE(in_tolerance_envelope(e, cr, to_ps(g.delta_l), to_ps(g.delta_u)));
  }
}

TEST_CASE("re-sequencing and head-of-line releases") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 500; ++trial) {
    const Picos dl = uni_int(rng, 0, 1000), du = uni_int(rng, 0, 1000), pmin = uni_int(rng, 0, 50),
                pmax = pmin + uni_int(rng, 0, 50);
    std::vector<Picos> et, tent, phi;
    Picos t = 0;
    for (int n = 0; n < 60; ++n) {
      t += uni_int(rng, -500, 2000);
      et.push_back(t);
      tent.push_back(t + uni_int(rng, -static_cast<int>(dl), static_cast<int>(du)));
      phi.push_back(uni_int(rng, static_cast<int>(pmin), static_cast<int>(pmax)));
    }
    const auto rs = resequence_release(tent);
    REQUIRE(std::is_sorted(rs.begin(), rs.end()));
    REQUIRE(in_resequencing_envelope(et, rs, dl, du));
    const auto hl = hol_release(tent, phi, pmin, pmax);
    REQUIRE(std::is_sorted(hl.begin(), hl.end()));
    REQUIRE(in_hol_envelope(et, hl, dl, du, pmin, pmax));
    REQUIRE(hol_equivalence_check(tent, phi).equal());
  }
  CHECK_THROWS_AS(hol_release(std::vector<Picos>{1, 2}, std::vector<Picos>{0, 9}, Picos{0}, Picos{5}), DomainError);
  CHECK_THROWS_AS(hol_release(std::vector<Picos>{1}, std::vector<Picos>{}), DomainError);
  CHECK(resequence_release(std::vector<Picos>{}).empty());
}

TEST_CASE("head-of-line witness decomposition") {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 5000; ++i) {
    const double a = uni(rng, -5, 5), x0 = uni(rng, 0, 2), x1 = x0 + uni(rng, 0, 2), y0 = uni(rng, -5, 5),
                 y1 = y0 + uni(rng, 0, 5);
    const double lo = x0 + std::max(a, y0), hi = x1 + std::max(a, y1);
    const double z = uni(rng, lo, hi);
    const HolWitness w = hol_decompose(a, x0, x1, y0, y1, z);
    REQUIRE(w.x >= x0 - 1e-12);
    REQUIRE(w.x <= x1 + 1e-12);
    REQUIRE(w.y >= y0 - 1e-12);
    REQUIRE(w.y <= y1 + 1e-12);
    REQUIRE(w.x + std::max(a, w.y) == Approx(z).margin(1e-12));
    CHECK_THROWS_AS(hol_decompose(a, x0, x1, y0, y1, hi + 1), InfeasibleError);
    CHECK_THROWS_AS(hol_decompose(a, x0, x1, y0, y1, lo - 1), InfeasibleError);
  }
  CHECK_THROWS_AS(hol_decompose(0, 1, 0, 0, 1, 1), DomainError);
}

TEST_CASE("earliness and header errors") {
  CHECK(earliness<Picos>(100, 10, 70, HeaderMode::standard) == 40);
  CHECK(earliness<Picos>(100, 10, 70, HeaderMode::te_stamping, Picos{5}) == 45);
  CHECK_THROWS_AS(earliness<Picos>(100, 10, 70, HeaderMode::te_stamping), ConfigError);
  CHECK(theoretical_eligibility<Picos>(10, 5) == 15);

  std::mt19937_64 rng(34);
  for (int i = 0; i < 10000; ++i) {
    const Seconds eps = uni(rng, 0, 100e-9);
    for (auto m : {ErrorMode::random, ErrorMode::adversarial_plus, ErrorMode::adversarial_minus, ErrorMode::zero}) {
      REQUIRE(sample_header_error(eps, m, rng).within_bound());
      REQUIRE(std::abs(header_error_ps(to_ps(eps), m, rng)) <= to_ps(eps));
    }
  }
  HeaderErrorBudget over;
  over.e_ts = 2e-9;
  over.e_acq = 2e-9;
  over.epsilon = 3e-9;
  CHECK_FALSE(over.within_bound());
  CHECK(apply_header_error(1e-6, over) == Approx(1.004e-6));
}
