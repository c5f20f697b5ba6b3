#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bounds.hpp"
#include "clocks.hpp"
#include "curves.hpp"
#include "dampers.hpp"
#include "errors.hpp"
#include "units.hpp"

namespace damperlab {

struct NodeSpec {
  Curve beta = Curve::rate_latency(0, 0);  // per output port, bytes
  JcsSpec fabric;
};

struct FlowSpec {
  std::string name;
  std::string src_host;
  std::string dst_host;
  std::vector<std::string> path;  // switches, in order
  Curve alpha = Curve::zero(Unit::bytes);            // at the source
  Curve alpha_packets = Curve::zero(Unit::packets);  // at the source
  double l_min = 0;
  double l_max = 0;
};

enum class DeploymentKind { none, rcsp, rgcq_te, fopleq, hol };

inline const char* to_string(DeploymentKind k) {
  switch (k) {
    case DeploymentKind::none: return "none";
    case DeploymentKind::rcsp: return "rcsp";
    case DeploymentKind::rgcq_te: return "rgcq_te";
    case DeploymentKind::fopleq: return "fopleq";
    case DeploymentKind::hol: return "hol";
  }
  return "?";
}

inline DeploymentKind deployment_kind_from(const std::string& s) {
  for (auto k : {DeploymentKind::none, DeploymentKind::rcsp, DeploymentKind::rgcq_te, DeploymentKind::fopleq,
                 DeploymentKind::hol})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown deployment '" + s + "'");
}

struct Deployment {
  DeploymentKind kind = DeploymentKind::none;
  DamperSpec damper;  // placed at every switch and at every destination
  bool fabric_fifo = true;
};

struct NetworkSpec {
  std::map<std::string, NodeSpec> nodes;
  BdsSpec link;       // switch-to-switch propagation
  BdsSpec host_link;  // host-to-switch and switch-to-host propagation
  ClockModel clock;
  Seconds epsilon = 0;  // header error bound per JCS
  std::vector<FlowSpec> flows;

  void validate() const {
    if (flows.empty()) throw ConfigError("network has no flows");
    for (const auto& f : flows) {
      if (f.path.empty()) throw ConfigError("flow '" + f.name + "' has an empty path");
      for (const auto& n : f.path)
        if (!nodes.count(n)) throw ConfigError("flow '" + f.name + "' visits unknown node '" + n + "'");
      for (std::size_t i = 0; i + 1 < f.path.size(); ++i)
        if (f.path[i] == f.path[i + 1]) throw ConfigError("flow '" + f.name + "' has a self loop");
      if (f.alpha.unit() != Unit::bytes || f.alpha_packets.unit() != Unit::packets)
        throw ConfigError("flow '" + f.name + "' curves have the wrong units");
    }
  }
};

// Delay bound of a FIFO port with the given aggregate arrival and service curves.
inline Seconds node_delay_bound(const Curve& aggregate_alpha, const Curve& beta) {
  const Seconds latency = beta.service_lower_bound().latency;
  return std::max(horizontal_deviation(aggregate_alpha, beta), latency);
}

struct FlowBounds {
  std::string name;
  Seconds d_upper = 0;
  Seconds d_lower = 0;
  Seconds jitter = 0;
  Seconds penalty = 0;  // theta and prefix-jitter terms summed over blocks
  Seconds prefix_j = 0; // prefix-jitter terms only
};

struct TfaResult {
  std::map<std::string, Seconds> per_port_delay;
  std::vector<FlowBounds> flows;
  bool converged = false;
  int iterations = 0;
  std::string diagnostic;
};

inline std::string port_key(const std::string& from, const std::string& to) { return from + "->" + to; }

namespace detail {

inline std::string next_hop(const FlowSpec& f, std::size_t h) {
  return h + 1 < f.path.size() ? f.path[h + 1] : f.dst_host;
}

// Blocks of a flow under a damper deployment; block h ends at the damper of switch h, the last
// block at the destination damper. Queue delays come from `delays`.
inline std::vector<Block> flow_blocks(const NetworkSpec& net, const FlowSpec& f, const Deployment& dep,
                                      const std::map<std::string, Seconds>& delays) {
  std::vector<Block> out;
  DamperSpec d = dep.damper;
  const std::size_t hops = f.path.size();
  for (std::size_t h = 0; h <= hops; ++h) {
    Block b;
    b.id = f.name + "#" + std::to_string(h);
    b.damper = d;
    b.clock = net.clock;
    if (h > 0) {
      const std::string& at = f.path[h - 1];
      const std::string port = port_key(at, next_hop(f, h - 1));
      JcsSpec q{delays.at(port), net.epsilon, true, port, 0};
      b.elements.emplace_back(q);
    }
    b.elements.emplace_back(h == 0 || h == hops ? net.host_link : net.link);
    if (h < hops) {
      JcsSpec fab = net.nodes.at(f.path[h]).fabric;
      fab.epsilon = net.epsilon;
      fab.fifo = dep.fabric_fifo;
      fab.clock_id = "fabric:" + f.path[h];
      b.elements.emplace_back(fab);
    }
    out.push_back(std::move(b));
  }
  return out;
}

// Per-block bounds for the FIFO-constrained and tolerance deployments; the per-packet curve at each
// block entrance is the source curve shifted by the upstream jitter.
inline std::vector<BoundsResult> block_bounds(const NetworkSpec& net, const FlowSpec& f, const Deployment& dep,
                                              const std::vector<Block>& blocks) {
  (void)net;
  std::vector<BoundsResult> out;
  Seconds upstream_v = 0;
  for (const auto& b : blocks) {
    const Curve ap = propagate_curve(f.alpha_packets, upstream_v);
    BoundsResult r = select_bounds(b, ap);
    if (dep.kind == DeploymentKind::rgcq_te) r = theorem1_bounds(b);
    upstream_v += r.jitter;
    out.push_back(r);
  }
  return out;
}

}  // namespace detail

// Jitter of each flow at the entrance of each of its output queues, given the current port delays.
// Index h refers to the queue at path[h] -> next hop.
inline std::vector<Seconds> queue_entrance_jitter(const NetworkSpec& net, const FlowSpec& f, const Deployment& dep,
                                                  const std::map<std::string, Seconds>& delays) {
  std::vector<Seconds> out;
  const std::size_t hops = f.path.size();
  if (dep.kind == DeploymentKind::none) {
    // lower delay bound 0 convention: every upstream delay bound counts fully as jitter
    Seconds j = net.host_link.nu;
    for (std::size_t h = 0; h < hops; ++h) {
      j += net.nodes.at(f.path[h]).fabric.delta;
      out.push_back(j);
      j += delays.at(port_key(f.path[h], detail::next_hop(f, h))) + (h + 1 < hops ? net.link.nu : net.host_link.nu);
    }
    return out;
  }
  const auto blocks = detail::flow_blocks(net, f, dep, delays);
  if (dep.kind == DeploymentKind::rgcq_te) {
    for (std::size_t h = 0; h < hops; ++h) {
      std::vector<Block> prefix(blocks.begin(), blocks.begin() + static_cast<std::ptrdiff_t>(h + 1));
      for (auto& b : prefix) b.damper.header_mode = HeaderMode::te_stamping;
      out.push_back(theorem2_te_bounds(prefix).jitter);
    }
    return out;
  }
  const auto per = detail::block_bounds(net, f, dep, blocks);
  Seconds v = 0;
  for (std::size_t h = 0; h < hops; ++h) {
    v += per[h].jitter;
    out.push_back(v);
  }
  return out;
}

inline FlowBounds flow_bounds(const NetworkSpec& net, const FlowSpec& f, const Deployment& dep,
                              const std::map<std::string, Seconds>& delays) {
  FlowBounds fb;
  fb.name = f.name;
  const std::size_t hops = f.path.size();
  if (dep.kind == DeploymentKind::none) {
    Seconds up = 2 * net.host_link.pi_upper + static_cast<double>(hops - 1) * net.link.pi_upper;
    Seconds lo = 2 * net.host_link.pi_lower + static_cast<double>(hops - 1) * net.link.pi_lower;
    for (std::size_t h = 0; h < hops; ++h)
      up += net.nodes.at(f.path[h]).fabric.delta + delays.at(port_key(f.path[h], detail::next_hop(f, h)));
    fb.d_upper = up;
    fb.d_lower = lo;
    fb.jitter = up - lo;
    return fb;
  }
  auto blocks = detail::flow_blocks(net, f, dep, delays);
  BoundsResult r;
  if (dep.kind == DeploymentKind::rgcq_te) {
    for (auto& b : blocks) b.damper.header_mode = HeaderMode::te_stamping;
    r = theorem2_te_bounds(blocks);
  } else {
    const auto per = detail::block_bounds(net, f, dep, blocks);
    std::vector<PathPart> parts(per.begin(), per.end());
    r = e2e_sum(parts);
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (!blocks[i].all_fifo()) fb.prefix_j += prefix_jitter(blocks[i], *last_non_fifo_index(blocks[i]));
  }
  fb.d_upper = r.d_upper;
  fb.d_lower = r.d_lower;
  fb.jitter = r.jitter;
  fb.penalty = r.breakdown.penalty;
  return fb;
}

// Fixed-point iteration on the port delays, starting from zero.
inline TfaResult fixed_point(const NetworkSpec& net, const Deployment& dep, int max_iterations = 1000) {
  net.validate();
  dep.damper.validate();
  std::map<std::string, Seconds> delays;
  for (const auto& f : net.flows)
    for (std::size_t h = 0; h < f.path.size(); ++h) delays[port_key(f.path[h], detail::next_hop(f, h))] = 0;

  TfaResult res;
  for (int it = 1; it <= max_iterations; ++it) {
    std::map<std::string, std::vector<Curve>> agg;
    for (const auto& f : net.flows) {
      const auto js = queue_entrance_jitter(net, f, dep, delays);
      for (std::size_t h = 0; h < f.path.size(); ++h)
        agg[port_key(f.path[h], detail::next_hop(f, h))].push_back(propagate_curve(f.alpha, js[h]));
    }
    Seconds change = 0;
    std::map<std::string, Seconds> next;
    for (const auto& [port, curves] : agg) {
      const std::string node = port.substr(0, port.find("->"));
      const Seconds d = node_delay_bound(Curve::sum(curves, Unit::bytes), net.nodes.at(node).beta);
      if (std::isinf(d)) {
        res.per_port_delay = delays;
        res.iterations = it;
        res.diagnostic = "port " + port + " is unstable (aggregate rate exceeds service rate)";
        return res;
      }
      change = std::max(change, std::abs(d - delays[port]));
      next[port] = d;
    }
    delays = std::move(next);
    res.iterations = it;
    if (change < 1e-12) {
      res.converged = true;
      break;
    }
  }
  res.per_port_delay = delays;
  if (!res.converged) {
    res.diagnostic = "no fixed point within " + std::to_string(max_iterations) + " iterations";
    return res;
  }
  for (const auto& f : net.flows) res.flows.push_back(flow_bounds(net, f, dep, delays));
  return res;
}

struct DeploymentRow {
  Deployment deployment;
  TfaResult result;
};

inline std::vector<DeploymentRow> deployment_report(const NetworkSpec& net, const std::vector<Deployment>& deps) {
  std::vector<DeploymentRow> out;
  for (const auto& d : deps) out.push_back({d, fixed_point(net, d)});
  return out;
}

}  // namespace damperlab
