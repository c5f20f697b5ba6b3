#pragma once

#include <string>

#include "tfa.hpp"

namespace damperlab {

// Synthetic 15-switch network in the spirit of an in-vehicle backbone: a ring of eight core
// switches C0..C7, edge switches E0..E6 hanging off C0..C6, and 40 class-A flows of 2 to 9 hops
// travelling both ways around the ring, which creates cyclic port dependencies.
inline NetworkSpec orion_network(bool with_fabric_jitter = true) {
  NetworkSpec net;
  const Curve beta = Curve::rate_latency(62.49e6, 12.5 * kUs);
  const JcsSpec fabric{with_fabric_jitter ? 2 * kUs : 0.5 * kUs, 0, true, "", 0.5 * kUs};
  for (int i = 0; i < 8; ++i) net.nodes["C" + std::to_string(i)] = {beta, fabric};
  for (int i = 0; i < 7; ++i) net.nodes["E" + std::to_string(i)] = {beta, fabric};
  net.link = {0.1 * kUs, 0.1 * kUs, 0, true};
  net.host_link = {0.1 * kUs, 0.1 * kUs, 0, true};
  net.clock = ClockModel::free_running();
  net.epsilon = 50 * kNs;

  const Curve alpha = Curve::staircase(1470, 8 * kMs, 1470, Unit::bytes);
  const Curve alpha_p = Curve::staircase(10, 8 * kMs, 10, Unit::packets);
  for (int f = 0; f < 40; ++f) {
    const int a = f % 7;
    const int steps = (f * 3 + f / 7) % 7;  // 0..6 ring hops
    const int dir = f % 2 == 0 ? 1 : -1;
    FlowSpec fl;
    fl.name = "f" + std::to_string(f);
    fl.src_host = "h" + std::to_string(f);
    fl.path.push_back("E" + std::to_string(a));
    int c = a;
    fl.path.push_back("C" + std::to_string(c));
    for (int s = 0; s < steps; ++s) {
      c = ((c + dir) % 8 + 8) % 8;
      fl.path.push_back("C" + std::to_string(c));
    }
    if (c < 7 && steps > 0) {
      fl.path.push_back("E" + std::to_string(c));
      fl.dst_host = "d" + std::to_string(c);
    } else {
      fl.dst_host = "dc" + std::to_string(c);
    }
    fl.alpha = alpha;
    fl.alpha_packets = alpha_p;
    fl.l_min = fl.l_max = 147;
    net.flows.push_back(std::move(fl));
  }
  return net;
}

inline Deployment orion_deployment(DeploymentKind k, bool fabric_fifo) {
  Deployment d;
  d.kind = k;
  d.fabric_fifo = fabric_fifo;
  const Seconds grid = 998 * kNs, eps = 2 * kNs;
  switch (k) {
    case DeploymentKind::none: d.damper = presets::ideal(); break;
    case DeploymentKind::rcsp: d.damper = presets::rcsp(grid, eps); break;
    case DeploymentKind::rgcq_te:
      d.damper = presets::rgcq(grid, eps);
      d.damper.header_mode = HeaderMode::te_stamping;
      break;
    case DeploymentKind::fopleq: d.damper = presets::fopleq(grid, eps); break;
    case DeploymentKind::hol: d.damper = presets::hol(2 * kNs, 2 * kNs, 0, 5 * kNs); break;
  }
  return d;
}

}  // namespace damperlab
