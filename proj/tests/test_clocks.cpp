#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace damperlab;
using namespace damperlab::testing;
using Catch::Approx;

TEST_CASE("delay deviation bounds") {
  const auto ideal = delay_deviation_bounds(1e-3, ClockModel::ideal());
  CHECK(ideal.lo == 0);
  CHECK(ideal.hi == 0);
  const ClockModel c = ClockModel::free_running();
  const auto b = delay_deviation_bounds(250e-6, c);
  CHECK(b.hi == Approx(1e-4 * 250e-6 + 2e-9));
  CHECK(b.lo == Approx(-((1 - 1 / c.rho) * 250e-6 + 2e-9 / c.rho)));
  // large delays saturate at 2 omega when synchronized
  const auto s = delay_deviation_bounds(10.0, ClockModel::gptp());
  CHECK(s.hi == Approx(2e-6));
  CHECK(s.lo == Approx(-2e-6));
  CHECK_THROWS_AS(delay_deviation_bounds(-1, c), DomainError);
}

TEST_CASE("presets and validation") {
  CHECK(clock_preset("white_rabbit").omega == Approx(100e-9));
  CHECK_THROWS_AS(clock_preset("sundial"), ConfigError);
  CHECK_THROWS_AS((ClockModel{0.5, 0, kInf}).validate(), ConfigError);
  CHECK(sync_cap(5.0, kInf) == 5.0);
  CHECK(sync_cap(5.0, 1.0, 2) == 4.0);
}

TEST_CASE("arrival curve re-expressed in TAI") {
  const ClockModel c{1.001, 1e-6, kInf};
  const Curve lb = Curve::leaky_bucket(1000, 10);
  const Curve t = arrival_curve_to_tai(lb, c);
  CHECK(t.envelope().rate == Approx(1001));
  CHECK(t.envelope().burst == Approx(10 + 1000 * 1e-6));
  const Curve st = Curve::staircase(2, 1e-3, 1, Unit::bytes);
  const ClockModel s{1.001, 1e-6, 5e-7};
  const Curve ts = arrival_curve_to_tai(st, s);
  for (double x = 1e-5; x < 1e-2; x += 7.3e-5)
    CHECK(ts.eval(x) == Approx(st.eval(std::min(s.rho * x + s.eta, x + 2 * s.omega))));
}

TEST_CASE("random trajectories respect the clock model") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const ClockModel c = random_clock(rng);
    const ClockTrajectory tr(c, static_cast<std::uint64_t>(i), TrajectoryMode::random, 300 * kPsPerMs, 5 * kPsPerMs);
    Picos prev = tr.local_at(0);
    for (int k = 0; k < 2000; ++k) {
      const Picos t1 = std::uniform_int_distribution<Picos>(0, 200 * kPsPerMs)(rng);
      const Picos t2 = t1 + std::uniform_int_distribution<Picos>(0, 50 * kPsPerMs)(rng);
      const Picos d_local = tr.measure(t1, t2);
      const auto dev = delay_deviation_bounds(std::max<Seconds>(0, from_ps(d_local)), c);
      const double diff = from_ps(t2 - t1) - from_ps(d_local);
      REQUIRE(diff <= dev.hi + 2e-12);
      REQUIRE(diff >= dev.lo - 2e-12);
      if (c.synchronized()) REQUIRE(std::abs(from_ps(tr.local_at(t1) - t1)) <= c.omega + 1e-12);
      const Picos x = tr.local_at(t1);
      const Picos back = tr.tai_at(x);
      REQUIRE(tr.local_at(back) >= x);
      REQUIRE(tr.local_at(back - 1) < x);
    }
    for (Picos t = 0; t < 10 * kPsPerMs; t += 7777777) {
      REQUIRE(tr.local_at(t) >= prev);
      prev = tr.local_at(t);
    }
  }
}

TEST_CASE("adversarial trajectories follow the deviation edges") {
  const ClockModel c = ClockModel::gptp();
  const Seconds d = 100e-6;
  CHECK(adversarial_tai_duration(TrajectoryMode::fast_adversarial, c, d) - d ==
        Approx((c.rho - 1) * d + c.eta).epsilon(1e-9));
  CHECK(adversarial_tai_duration(TrajectoryMode::slow_adversarial, c, d) - d ==
        Approx(-((1 - 1 / c.rho) * d + c.eta / c.rho)).epsilon(1e-9));
  CHECK(adversarial_tai_duration(TrajectoryMode::sync_adversarial_fast, c, d) - d == Approx(2 * c.omega));
  CHECK_THROWS_AS(ClockTrajectory(ClockModel::free_running(), 1, TrajectoryMode::sync_adversarial_fast), ConfigError);
  const ClockTrajectory fast(c, 1, TrajectoryMode::fast_adversarial);
  CHECK(fast.advance(0, 1000000) == std::llround((c.rho * 1e-6 + c.eta) * 1e12));
}

TEST_CASE("trajectories are deterministic per seed") {
  const ClockModel c = ClockModel::gptp();
  const ClockTrajectory a(c, 5, TrajectoryMode::random), b(c, 5, TrajectoryMode::random), d(c, 6, TrajectoryMode::random);
  bool differs = false;
  for (Picos t = 0; t < 1000 * kPsPerMs; t += 12345678901) {
    CHECK(a.local_at(t) == b.local_at(t));
    differs |= a.local_at(t) != d.local_at(t);
  }
  CHECK(differs);
}
