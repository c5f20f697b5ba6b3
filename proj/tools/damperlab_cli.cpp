#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "damperlab/damperlab.hpp"

using namespace damperlab;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string format = "csv";
  bool precision_ns = false;
  bool dump_config = false;
  unsigned jobs = 1;
};

std::ostream& output(const Common& c, std::ofstream& file) {
  if (c.out.empty() || c.out == "-") return std::cout;
  file.open(c.out);
  if (!file) throw ConfigError(c.out + ": cannot write");
  return file;
}

void emit_config(const Common& c, const Json& j) {
  std::ofstream file;
  output(c, file) << j.dump(2) << "\n";
}

// Runs f(i) for i in [0, n) over `jobs` threads; results are indexed, so the order is deterministic.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, unsigned jobs, F f) {
  std::vector<R> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(m);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::max(1u, jobs); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

// Per-block bounds along a flow; the per-packet curve is shifted by the upstream jitter.
std::vector<BoundsResult> flow_block_bounds(const FlowConfig& f) {
  std::vector<BoundsResult> out;
  Seconds upstream = 0;
  for (const auto& b : f.blocks) {
    std::optional<Curve> ap;
    if (f.alpha_packets) ap = propagate_curve(*f.alpha_packets, upstream);
    out.push_back(select_bounds(b, ap));
    upstream += out.back().jitter;
  }
  return out;
}

bool te_capable(const FlowConfig& f) {
  return std::all_of(f.blocks.begin(), f.blocks.end(), [](const Block& b) { return !b.damper.fifo_constrained(); });
}

bool check(const char* what, Seconds got, Seconds want, Seconds tol, bool ns) {
  if (want == 0) return true;
  const bool ok = std::abs(got - want) <= tol;
  std::printf("  %-12s %s  expected %s +- %s  %s\n", what, fmt_duration(got, ns).c_str(), fmt_duration(want, ns).c_str(),
              fmt_duration(tol, ns).c_str(), ok ? "PASS" : "FAIL");
  return ok;
}

int cmd_analyze(const Common& c, bool te) {
  Config cfg = load_config(c.config);
  if (c.dump_config) {
    emit_config(c, to_json(cfg));
    return 0;
  }
  std::ofstream file;
  std::ostream& os = output(c, file);
  Json all = Json::array();
  bool ok = true;
  if (c.format == "csv") write_bounds_csv_header(os);
  for (const auto& f : cfg.flows) {
    const auto per = flow_block_bounds(f);
    std::vector<PathPart> parts(per.begin(), per.end());
    for (const auto& t : f.tail) parts.emplace_back(t);
    const BoundsResult e2e = e2e_sum(parts);
    std::optional<BoundsResult> ter;
    if (te || (f.expect && f.expect->te_jitter > 0)) {
      if (!te_capable(f)) throw ConfigError("flow '" + f.name + "': TE bounds need tolerance dampers");
      std::vector<Block> bs = f.blocks;
      for (auto& b : bs) b.damper.header_mode = HeaderMode::te_stamping;
      ter = theorem2_te_bounds(bs, f.tail);
    }
    if (c.format == "csv") {
      for (std::size_t i = 0; i < per.size(); ++i)
        write_bounds_csv_row(os, f.name, f.blocks[i].id.empty() ? "block" + std::to_string(i) : f.blocks[i].id, per[i]);
      write_bounds_csv_row(os, f.name, "e2e", e2e);
      if (ter) write_bounds_csv_row(os, f.name, "e2e_te", *ter);
    } else {
      Json blocks = Json::array();
      for (const auto& r : per) blocks.push_back(to_json(r));
      Json jf = {{"flow", f.name}, {"blocks", blocks}, {"e2e", to_json(e2e)}};
      if (ter) jf["e2e_te"] = to_json(*ter);
      all.push_back(jf);
    }
    if (f.expect) {
      std::printf("%s\n", f.name.c_str());
      const auto& e = *f.expect;
      ok &= check("d_upper", e2e.d_upper, e.d_upper, e.d_upper_tol, c.precision_ns);
      ok &= check("jitter", e2e.jitter, e.jitter, e.jitter_tol, c.precision_ns);
      if (ter) ok &= check("te_jitter", ter->jitter, e.te_jitter, e.te_jitter_tol, c.precision_ns);
    }
  }
  if (c.format == "json") os << all.dump(2) << "\n";
  return ok ? 0 : 1;
}

struct SimOpts {
  std::optional<std::size_t> trials;  // 1 for block runs, 1e4 for the experiments
  std::optional<std::uint64_t> seed;
  std::string scenario = "random";
  std::string flow;
  int block = -1;
  std::optional<Seconds> tau_us;
  Seconds e_tran_ns = 0;
  Seconds delta_l_us = 1;
  std::string clock_pair = "symmetric";
};

int cmd_simulate(const Common& c, const SimOpts& o) {
  if (o.scenario == "rgcq-reorder") {
    RgcqExperiment x;
    if (o.tau_us) x.tau_local = *o.tau_us * kUs;
    x.e_tran = o.e_tran_ns * kNs;
    x.clock_mode = clock_pair_mode_from(o.clock_pair);
    x.trials = o.trials.value_or(10000);
    x.seed = o.seed.value_or(1);
    const auto r = rgcq_reorder_experiment(x);
    std::printf("rgcq reorder frequency %.4f (%zu of %zu trials)\n", r.frequency, r.reorders, r.trials);
    return 0;
  }
  if (o.scenario == "rcsp-reorder") {
    RcspExperiment x;
    if (o.tau_us) x.tau_tai = *o.tau_us * kUs;
    x.delta_l = o.delta_l_us * kUs;
    x.trials = o.trials.value_or(10000);
    x.seed = o.seed.value_or(1);
    const auto r = rcsp_backtoback_experiment(x);
    std::printf("rcsp p_backtoback %.4f (1 - tau/delta_l = %.4f), p_reorder %.4f\n", r.p_backtoback,
                std::max(0.0, 1 - x.tau_tai / x.delta_l), r.p_reorder);
    return 0;
  }
  if (c.config.empty()) throw ConfigError("simulate needs --config for scenario '" + o.scenario + "'");
  Config cfg = load_config(c.config);
  if (c.dump_config) {
    emit_config(c, to_json(cfg));
    return 0;
  }
  if (cfg.flows.empty()) throw ConfigError("simulate needs at least one flow");
  std::vector<std::pair<const FlowConfig*, std::size_t>> targets;
  for (const auto& f : cfg.flows) {
    if (!o.flow.empty() && f.name != o.flow) continue;
    for (std::size_t i = 0; i < f.blocks.size(); ++i)
      if (o.block < 0 || static_cast<std::size_t>(o.block) == i) targets.emplace_back(&f, i);
  }
  if (targets.empty()) throw ConfigError("no block matches --flow/--block");

  if (o.scenario.rfind("tightness-", 0) == 0) {
    const auto target = tightness_target_from(o.scenario.substr(10));
    bool ok = true;
    for (const auto& [f, i] : targets) {
      const Block& b = f->blocks[i];
      const BoundsResult r = select_bounds(b, f->alpha_packets);
      const auto tr = tightness_trace(b, target);
      const bool upper = target == TightnessTarget::upper_drift || target == TightnessTarget::upper_sync;
      const Seconds want = upper ? r.d_upper : r.d_lower;
      const bool hit = std::abs(tr.delay - want) <= 1e-12;
      ok &= hit;
      std::printf("%s/%zu %s trace %s bound %s %s\n", f->name.c_str(), i, o.scenario.c_str(),
                  fmt_duration(tr.delay, c.precision_ns).c_str(), fmt_duration(want, c.precision_ns).c_str(), hit ? "HIT" : "MISS");
      if (!c.out.empty() && f == targets.front().first && i == targets.front().second) {
        std::ofstream file;
        write_sim_csv(output(c, file), tr.report);
      }
    }
    return ok ? 0 : 1;
  }
  if (o.scenario != "random") throw ConfigError("unknown scenario '" + o.scenario + "'");

  const SimulationConfig sc = cfg.simulation.value_or(SimulationConfig{});
  const std::uint64_t seed = o.seed.value_or(sc.seed);
  const std::size_t trials = o.trials.value_or(1);
  const std::size_t runs = targets.size() * trials;
  struct Run {
    SimReport report;
    std::vector<Violation> violations;
  };
  auto runs_out = parallel_map<Run>(runs, c.jobs, [&](std::size_t k) {
    const auto& [f, i] = targets[k / trials];
    SimConfig s;
    s.block = f->blocks[i];
    s.source = sc.source;
    s.packets = sc.packets;
    s.seed = mix_seed(seed, k);
    s.clock_mode = sc.clock_mode;
    s.error_mode = sc.error_mode;
    s.pin = sc.pin;
    const Curve ap = s.source.alpha_packets();
    Run r;
    r.report = simulate_block(s);
    const int k_jcs = s.block.jcs_count();
    r.violations = check_bounds(r.report, select_bounds(s.block, ap), 2 * (k_jcs + 1) + 2);
    return r;
  });
  bool ok = true;
  for (std::size_t k = 0; k < runs; ++k) {
    const auto& [f, i] = targets[k / trials];
    const auto& r = runs_out[k];
    std::printf("%s/%zu trial %zu: %zu packets, delay [%s, %s], reorders %zu, violations %zu\n", f->name.c_str(), i,
                k % trials, r.report.packets.size(), fmt_duration(from_ps(r.report.min_delay), c.precision_ns).c_str(),
                fmt_duration(from_ps(r.report.max_delay), c.precision_ns).c_str(), r.report.reorder_events.size(),
                r.violations.size());
    for (std::size_t v = 0; v < std::min<std::size_t>(r.violations.size(), 20); ++v)
      std::printf("  violation packet %lld delay %lld ps (%s)\n", static_cast<long long>(r.violations[v].packet_id),
                  static_cast<long long>(r.violations[v].delay), r.violations[v].kind.c_str());
    ok &= r.violations.empty();
  }
  if (!c.out.empty()) {
    std::ofstream file;
    write_sim_csv(output(c, file), runs_out.front().report);
  }
  return ok ? 0 : 1;
}

int cmd_case_study(const Common& c, const std::string& name, const std::string& deployment, const std::string& fifo) {
  if (name != "orion") throw ConfigError("unknown case study '" + name + "'");
  NetworkConfig nc;
  if (!c.config.empty()) {
    Config cfg = load_config(c.config);
    if (!cfg.network) throw ConfigError(c.config + ": no 'network' section");
    nc = *cfg.network;
  } else {
    nc.network = orion_network();
  }
  std::vector<bool> fifos;
  if (fifo == "true" || fifo == "both") fifos.push_back(true);
  if (fifo == "false" || fifo == "both") fifos.push_back(false);
  if (fifos.empty()) throw ConfigError("--fabric-fifo must be true, false or both");
  if (nc.deployments.empty() || deployment != "config") {
    nc.deployments.clear();
    std::vector<DeploymentKind> kinds;
    if (deployment == "all" || deployment == "config")
      kinds = {DeploymentKind::none, DeploymentKind::rcsp, DeploymentKind::rgcq_te, DeploymentKind::fopleq, DeploymentKind::hol};
    else
      kinds = {deployment_kind_from(deployment)};
    for (bool ff : fifos)
      for (auto k : kinds) nc.deployments.emplace_back(to_string(k), orion_deployment(k, ff));
  }
  if (c.dump_config) {
    Config out;
    out.network = nc;
    emit_config(c, to_json(out));
    return 0;
  }
  std::vector<Deployment> deps;
  for (const auto& d : nc.deployments) deps.push_back(d.second);
  const auto rows = parallel_map<DeploymentRow>(deps.size(), c.jobs, [&](std::size_t i) {
    return DeploymentRow{deps[i], fixed_point(nc.network, deps[i])};
  });
  bool ok = true;
  for (const auto& r : rows) {
    Seconds worst = 0;
    for (const auto& f : r.result.flows) worst = std::max(worst, f.jitter);
    std::printf("%-8s fabric_fifo=%d converged=%d iterations=%d worst jitter %s%s%s\n", to_string(r.deployment.kind),
                r.deployment.fabric_fifo ? 1 : 0, r.result.converged ? 1 : 0, r.result.iterations,
                fmt_duration(worst, c.precision_ns).c_str(), r.result.diagnostic.empty() ? "" : "  ", r.result.diagnostic.c_str());
    ok &= r.result.converged;
  }
  std::ofstream file;
  if (!c.out.empty()) write_deployment_csv(output(c, file), rows);
  return ok ? 0 : 1;
}

int cmd_table1(const Common& c, int k, Seconds du, Seconds eps) {
  std::printf("%-14s %14s %16s %16s\n", "clock", "omega", "threshold", "simplified");
  for (const char* name : {"white_rabbit", "gptp", "ntp"}) {
    const ClockModel cm = clock_preset(name);
    const auto t = sync_threshold(k, du, eps, cm);
    std::printf("%-14s %14s %16s %16s\n", name, fmt_duration(cm.omega, c.precision_ns).c_str(),
                fmt_duration(t.exact, c.precision_ns).c_str(), fmt_duration(t.simplified, c.precision_ns).c_str());
  }
  return 0;
}

int cmd_examples(const Common& c, const std::string& which) {
  std::vector<int> ids;
  if (which == "all") ids = {1, 2, 3};
  else ids = {std::stoi(which)};
  bool ok = true;
  const bool ns = c.precision_ns;
  for (int id : ids) {
    const ReferencePath p = reference_path(id);
    if (c.dump_config) {
      Config out;
      FlowConfig f;
      f.name = p.name;
      f.blocks = p.blocks;
      f.tail = p.tail;
      out.flows.push_back(f);
      emit_config(c, to_json(out));
      continue;
    }
    const auto e = p.e2e();
    const auto te = p.te();
    const auto& t = p.target;
    std::printf("example %d\n", id);
    if (id == 1) {
      const auto b = theorem1_bounds(p.blocks[0]);
      ok &= check("block D", b.d_upper, t.block_d_upper, 10 * kNs, ns);
      ok &= check("block V", b.jitter, t.block_jitter, 2 * kNs, ns);
      ok &= check("errors", b.breakdown.error_term, t.errors, 1 * kNs, ns);
      ok &= check("clocks", b.breakdown.clock_term, t.clocks, 1 * kNs, ns);
      ok &= check("basic", b.breakdown.basic, t.basic, 1 * kNs, ns);
      ok &= check("e2e D", e.d_upper, t.e2e_d_upper, 1 * kUs, ns);
      ok &= check("e2e V", e.jitter, t.e2e_jitter, 10 * kNs, ns);
    } else {
      ok &= check("e2e D", e.d_upper, t.e2e_d_upper, 1 * kUs, ns);
      ok &= check("e2e V", e.jitter, t.e2e_jitter, 50 * kNs, ns);
      ok &= check("errors", e.breakdown.error_term, t.errors, 50 * kNs, ns);
      ok &= check("clocks", e.breakdown.clock_term, t.clocks, 50 * kNs, ns);
      ok &= check("basic", e.breakdown.basic, t.basic, 50 * kNs, ns);
    }
    ok &= check("TE V", te.jitter, t.te_jitter, 50 * kNs, ns);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"damper delay and jitter analysis"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--out", c.out, "output file");
    s->add_flag("--precision-ns", c.precision_ns, "print durations as integer ns");
    s->add_flag("--dump-config", c.dump_config, "print the normalized configuration and exit");
    s->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  };

  bool te = false;
  auto* analyze = app.add_subcommand("analyze", "delay and jitter bounds for the flows of a config");
  add_common(analyze);
  analyze->add_option("--config", c.config, "config file")->required();
  analyze->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  analyze->add_flag("--te", te, "also compute TE time-stamping bounds");

  SimOpts so;
  auto* simulate = app.add_subcommand("simulate", "discrete-event simulation and experiments");
  add_common(simulate);
  simulate->add_option("--config", c.config, "config file");
  simulate->add_option("--trials", so.trials, "trials per block or experiment");
  simulate->add_option("--seed", so.seed, "run seed");
  simulate->add_option("--scenario", so.scenario, "random, tightness-<target>, rgcq-reorder, rcsp-reorder");
  simulate->add_option("--flow", so.flow, "only this flow");
  simulate->add_option("--block", so.block, "only this block index");
  simulate->add_option("--tau-us", so.tau_us, "packet spacing for the reordering experiments");
  simulate->add_option("--e-tran-ns", so.e_tran_ns, "transmission-time header error (rgcq-reorder)");
  simulate->add_option("--delta-l-us", so.delta_l_us, "early tolerance (rcsp-reorder)");
  simulate->add_option("--clock-pair", so.clock_pair, "symmetric, downstream_slower, downstream_faster");

  std::string study, deployment = "all", fabric_fifo = "both";
  auto* cs = app.add_subcommand("case-study", "fixed-point network analysis under damper deployments");
  add_common(cs);
  cs->add_option("name", study, "case study")->required();
  cs->add_option("--config", c.config, "network config (default: built-in)");
  cs->add_option("--deployment", deployment, "none, rcsp, rgcq_te, fopleq, hol, all or config");
  cs->add_option("--fabric-fifo", fabric_fifo, "true, false or both");

  int k = 2;
  double du_ns = 0, eps_ns = 0;
  auto* t1 = app.add_subcommand("table1", "synchronization thresholds below which omega never binds");
  add_common(t1);
  t1->add_option("--k", k, "JCS count");
  t1->add_option("--delta-u-ns", du_ns, "damper late tolerance");
  t1->add_option("--epsilon-ns", eps_ns, "header error bound");

  std::string which = "all";
  auto* ex = app.add_subcommand("examples", "recompute the worked example paths and compare with their targets");
  add_common(ex);
  ex->add_option("--which", which, "1, 2, 3 or all")->check(CLI::IsMember({"1", "2", "3", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*analyze) return cmd_analyze(c, te);
    if (*simulate) return cmd_simulate(c, so);
    if (*cs) return cmd_case_study(c, study, deployment, fabric_fifo);
    if (*t1) return cmd_table1(c, k, du_ns * kNs, eps_ns * kNs);
    if (*ex) return cmd_examples(c, which);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
