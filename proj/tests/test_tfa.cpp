#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace damperlab;
using namespace damperlab::testing;
using Catch::Approx;

namespace {

NetworkSpec two_hop(double rate, double burst, double R, Seconds T, Seconds fabric) {
  NetworkSpec n;
  for (const char* s : {"S1", "S2"}) n.nodes[s] = NodeSpec{Curve::rate_latency(R, T), JcsSpec{fabric, 0, true, "", 0}};
  n.link = BdsSpec{1 * kUs, 1 * kUs, 0, true};
  n.host_link = BdsSpec{0.5 * kUs, 0.5 * kUs, 0, true};
  n.clock = ClockModel::ideal();
  FlowSpec f;
  f.name = "f";
  f.src_host = "h1";
  f.dst_host = "h2";
  f.path = {"S1", "S2"};
  f.alpha = Curve::leaky_bucket(rate, burst);
  f.alpha_packets = Curve::leaky_bucket(rate / 1000, 1, Unit::packets);
  f.l_min = f.l_max = 1000;
  n.flows = {f};
  return n;
}

}  // namespace

TEST_CASE("node delay bound") {
  CHECK(node_delay_bound(Curve::leaky_bucket(1e5, 1000), Curve::rate_latency(1e6, 5e-6)) == Approx(5e-6 + 1e-3));
  CHECK(node_delay_bound(Curve::zero(), Curve::rate_latency(1e6, 5e-6)) == Approx(5e-6));
  CHECK(node_delay_bound(Curve::leaky_bucket(2e6, 1), Curve::rate_latency(1e6, 5e-6)) == kInf);
}

TEST_CASE("two-hop line without dampers matches the hand computation") {
  const double r = 1e5, b = 3000, R = 1e7;
  const Seconds T = 10 * kUs, d = 2 * kUs;
  const TfaResult res = fixed_point(two_hop(r, b, R, T, d), Deployment{});
  REQUIRE(res.converged);
  const Seconds d1 = T + (b + r * d) / R;
  const Seconds d2 = T + (b + r * (2 * d + d1)) / R;
  CHECK(res.per_port_delay.at("S1->S2") == Approx(d1).epsilon(1e-12));
  CHECK(res.per_port_delay.at("S2->h2") == Approx(d2).epsilon(1e-12));
  CHECK(res.iterations == 3);
  REQUIRE(res.flows.size() == 1);
  CHECK(res.flows[0].d_upper == Approx(2 * 0.5e-6 + 1e-6 + 2 * d + d1 + d2).epsilon(1e-12));
  CHECK(res.flows[0].d_lower == Approx(2e-6).epsilon(1e-12));
}

TEST_CASE("dampers cut the jitter fed to the second queue") {
  const NetworkSpec n = two_hop(1e5, 3000, 1e7, 10 * kUs, 2 * kUs);
  Deployment dep{DeploymentKind::rcsp, presets::rcsp(998 * kNs, 2 * kNs), true};
  const TfaResult with = fixed_point(n, dep), without = fixed_point(n, Deployment{});
  REQUIRE(with.converged);
  CHECK(with.per_port_delay.at("S2->h2") < without.per_port_delay.at("S2->h2"));
  CHECK(with.flows[0].jitter < without.flows[0].jitter);
  const auto js = queue_entrance_jitter(n, n.flows[0], dep, with.per_port_delay);
  REQUIRE(js.size() == 2);
  CHECK(js[1] > js[0]);
}

TEST_CASE("zero traffic leaves only the service latency") {
  NetworkSpec n = two_hop(0, 0, 1e7, 10 * kUs, 2 * kUs);
  const TfaResult res = fixed_point(n, Deployment{});
  REQUIRE(res.converged);
  for (const auto& [port, d] : res.per_port_delay) CHECK(d == Approx(10 * kUs));
}

TEST_CASE("overloaded port reports instability without throwing") {
  const TfaResult res = fixed_point(two_hop(2e7, 3000, 1e7, 10 * kUs, 2 * kUs), Deployment{});
  CHECK_FALSE(res.converged);
  CHECK_FALSE(res.diagnostic.empty());
  CHECK(res.flows.empty());
}

TEST_CASE("network validation") {
  NetworkSpec n = two_hop(1e5, 3000, 1e7, 10 * kUs, 2 * kUs);
  n.flows[0].path = {"S1", "S9"};
  CHECK_THROWS_AS(fixed_point(n, Deployment{}), ConfigError);
  n.flows.clear();
  CHECK_THROWS_AS(n.validate(), ConfigError);
  CHECK_THROWS_AS(deployment_kind_from("teleport"), ConfigError);
  CHECK(deployment_kind_from("rgcq_te") == DeploymentKind::rgcq_te);
}

TEST_CASE("synthetic case study converges quickly and deterministically") {
  const NetworkSpec net = orion_network();
  REQUIRE(net.flows.size() == 40);
  for (auto k : {DeploymentKind::rcsp, DeploymentKind::rgcq_te, DeploymentKind::fopleq, DeploymentKind::hol}) {
    const TfaResult a = fixed_point(net, orion_deployment(k, true));
    REQUIRE(a.converged);
    CHECK(a.iterations <= 2);
    const TfaResult b = fixed_point(net, orion_deployment(k, true));
    REQUIRE(a.flows.size() == b.flows.size());
    for (std::size_t i = 0; i < a.flows.size(); ++i) {
      CHECK(a.flows[i].d_upper == b.flows[i].d_upper);
      CHECK(a.flows[i].jitter == b.flows[i].jitter);
    }
  }
  const TfaResult none = fixed_point(net, orion_deployment(DeploymentKind::none, true));
  REQUIRE(none.converged);
  const TfaResult rc = fixed_point(net, orion_deployment(DeploymentKind::rcsp, true));
  for (std::size_t i = 0; i < none.flows.size(); ++i) CHECK(rc.flows[i].jitter < none.flows[i].jitter);
}
