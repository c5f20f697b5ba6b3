#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "config.hpp"

namespace damperlab {

// Durations are printed in us with 3 decimals, or as integer ns.
inline std::string fmt_duration(Seconds s, bool ns = false) {
  if (std::isinf(s)) return "inf";
  char buf[64];
  if (ns) std::snprintf(buf, sizeof buf, "%lld ns", static_cast<long long>(std::llround(s / kNs)));
  else std::snprintf(buf, sizeof buf, "%.3f us", s / kUs);
  return buf;
}

inline void write_sim_csv(std::ostream& os, const SimReport& r) {
  os << "packet_id,entry_tai_ps,exit_tai_ps,delay_ps,reordered_flag\n";
  for (const auto& p : r.packets)
    os << p.id << ',' << p.entry << ',' << p.exit << ',' << p.delay << ',' << (p.reordered ? 1 : 0) << '\n';
}

inline Json to_json(const BoundsResult& r) {
  return {{"theorem", r.theorem},
          {"d_upper_s", r.d_upper},
          {"d_lower_s", r.d_lower},
          {"jitter_s", r.jitter},
          {"psi_upper_s", r.psi_upper},
          {"psi_lower_s", r.psi_lower},
          {"breakdown",
           {{"basic_s", r.breakdown.basic},
            {"error_s", r.breakdown.error_term},
            {"clock_s", r.breakdown.clock_term},
            {"penalty_s", r.breakdown.penalty}}}};
}

inline BoundsResult bounds_from_json(const Json& j) {
  BoundsResult r;
  r.theorem = j.at("theorem").get<std::string>();
  r.d_upper = j.at("d_upper_s").get<double>();
  r.d_lower = j.at("d_lower_s").get<double>();
  r.jitter = j.at("jitter_s").get<double>();
  r.psi_upper = j.at("psi_upper_s").get<double>();
  r.psi_lower = j.at("psi_lower_s").get<double>();
  const Json& b = j.at("breakdown");
  r.breakdown.basic = b.at("basic_s").get<double>();
  r.breakdown.error_term = b.at("error_s").get<double>();
  r.breakdown.clock_term = b.at("clock_s").get<double>();
  r.breakdown.penalty = b.at("penalty_s").get<double>();
  return r;
}

inline void write_bounds_csv_header(std::ostream& os) {
  os << "flow,scope,theorem,d_upper_us,d_lower_us,jitter_us,basic_us,error_us,clock_us,penalty_us\n";
}

inline void write_bounds_csv_row(std::ostream& os, const std::string& flow, const std::string& scope, const BoundsResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", flow.c_str(), scope.c_str(),
                r.theorem.c_str(), r.d_upper / kUs, r.d_lower / kUs, r.jitter / kUs, r.breakdown.basic / kUs,
                r.breakdown.error_term / kUs, r.breakdown.clock_term / kUs, r.breakdown.penalty / kUs);
  os << buf;
}

inline void write_deployment_csv(std::ostream& os, const std::vector<DeploymentRow>& rows) {
  os << "deployment,fabric_fifo,flow,d_upper_us,d_lower_us,jitter_us,penalty_us,converged,iterations\n";
  char buf[512];
  for (const auto& row : rows)
    for (const auto& f : row.result.flows) {
      std::snprintf(buf, sizeof buf, "%s,%d,%s,%.6f,%.6f,%.6f,%.6f,%d,%d\n", to_string(row.deployment.kind),
                    row.deployment.fabric_fifo ? 1 : 0, f.name.c_str(), f.d_upper / kUs, f.d_lower / kUs, f.jitter / kUs,
                    f.penalty / kUs, row.result.converged ? 1 : 0, row.result.iterations);
      os << buf;
    }
}

}  // namespace damperlab
