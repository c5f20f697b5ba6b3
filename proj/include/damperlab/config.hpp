#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "clocks.hpp"
#include "curves.hpp"
#include "dampers.hpp"
#include "errors.hpp"
#include "orion.hpp"
#include "sim.hpp"
#include "tfa.hpp"

namespace damperlab {

using Json = nlohmann::json;

// Line and column of every key and value of a syntactically valid JSON text, keyed by JSON pointer.
class PositionIndex {
 public:
  PositionIndex() = default;
  explicit PositionIndex(const std::string& text) : s_(text) {
    skip_ws();
    if (i_ < s_.size()) value("");
  }

  std::string where(const std::string& pointer) const {
    auto it = pos_.find(pointer);
    if (it == pos_.end()) return "";
    return std::to_string(it->second.first) + ":" + std::to_string(it->second.second);
  }

 private:
  void mark(const std::string& p) {
    if (!pos_.count(p)) pos_[p] = {line_, static_cast<int>(i_ - line_start_) + 1};
  }
  void advance() {
    if (s_[i_] == '\n') {
      ++line_;
      line_start_ = i_ + 1;
    }
    ++i_;
  }
  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r')) advance();
  }
  std::string str() {
    std::string out;
    advance();  // opening quote
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') {
        advance();
        char c = s_[i_];
        out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
      } else {
        out += s_[i_];
      }
      advance();
    }
    advance();  // closing quote
    return out;
  }
  static std::string escape(const std::string& k) {
    std::string o;
    for (char c : k) o += c == '~' ? std::string("~0") : c == '/' ? std::string("~1") : std::string(1, c);
    return o;
  }
  void value(const std::string& p) {
    mark(p);
    char c = s_[i_];
    if (c == '{') {
      advance();
      skip_ws();
      while (i_ < s_.size() && s_[i_] != '}') {
        const std::pair<int, int> at{line_, static_cast<int>(i_ - line_start_) + 1};
        const std::string key_ptr = p + "/" + escape(str());
        pos_.emplace(key_ptr + "#key", at);
        skip_ws();
        advance();  // ':'
        skip_ws();
        value(key_ptr);
        skip_ws();
        if (s_[i_] == ',') advance();
        skip_ws();
      }
      advance();
    } else if (c == '[') {
      advance();
      skip_ws();
      for (int n = 0; i_ < s_.size() && s_[i_] != ']'; ++n) {
        value(p + "/" + std::to_string(n));
        skip_ws();
        if (s_[i_] == ',') advance();
        skip_ws();
      }
      advance();
    } else if (c == '"') {
      str();
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' && s_[i_] != ' ' && s_[i_] != '\n' &&
             s_[i_] != '\r' && s_[i_] != '\t')
        advance();
    }
  }

  std::string s_;
  std::size_t i_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
  std::map<std::string, std::pair<int, int>> pos_;
};

namespace cfg {

struct Source {
  std::string name = "<config>";
  PositionIndex index;
};

// View of one JSON object that remembers which keys were consumed and rejects the rest.
class Obj {
 public:
  Obj(const Json& j, std::string ptr, const Source& src) : j_(j), ptr_(std::move(ptr)), src_(src) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg, const std::string& at = "") const {
    const std::string p = at.empty() ? ptr_ : at;
    std::string loc = src_.index.where(p + "#key");
    if (loc.empty()) loc = src_.index.where(p);
    throw ConfigError(src_.name + (loc.empty() ? "" : ":" + loc) + ": " + msg + " (at '" + (p.empty() ? "/" : p) + "')");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string ptr(const std::string& k) const { return ptr_ + "/" + k; }

  const Json& get(const std::string& k) {
    if (!j_.contains(k)) fail("missing key '" + k + "'");
    used_.insert(k);
    return j_.at(k);
  }

  template <typename T>
  T req(const std::string& k) {
    const Json& v = get(k);
    try {
      return v.get<T>();
    } catch (const Json::exception&) {
      fail("wrong type for '" + k + "'", ptr(k));
    }
  }

  template <typename T>
  T opt(const std::string& k, T def) {
    if (!j_.contains(k)) return def;
    return req<T>(k);
  }

  // Duration under exactly one of root_ps, root_ns, root_us, root_ms, root_s; null or "inf" means +inf.
  std::optional<Seconds> duration_opt(const std::string& root) {
    static const std::pair<const char*, double> units[] = {{"_ps", kPs}, {"_ns", kNs}, {"_us", kUs}, {"_ms", kMs}, {"_s", 1.0}};
    std::optional<Seconds> out;
    for (const auto& [suf, scale] : units) {
      const std::string k = root + suf;
      if (!j_.contains(k)) continue;
      if (out) fail("duration '" + root + "' given twice", ptr(k));
      const Json& v = get(k);
      if (v.is_null() || (v.is_string() && v.get<std::string>() == "inf")) {
        out = kInf;
      } else if (v.is_number()) {
        out = v.get<double>() * scale;
        if (!std::isfinite(*out)) fail("non-finite duration", ptr(k));
      } else {
        fail("duration must be a number, null or \"inf\"", ptr(k));
      }
    }
    return out;
  }
  Seconds duration(const std::string& root, std::optional<Seconds> def = std::nullopt) {
    auto d = duration_opt(root);
    if (d) return *d;
    if (def) return *def;
    fail("missing duration '" + root + "_{ns,us,ms}'");
  }

  Obj child(const std::string& k) { return Obj(get(k), ptr(k), src_); }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail("unknown key '" + it.key() + "'", ptr(it.key()));
  }

  const Source& source() const { return src_; }
  const std::string& pointer() const { return ptr_; }

 private:
  const Json& j_;
  std::string ptr_;
  const Source& src_;
  std::set<std::string> used_;
};

// ---- readers

inline Curve read_curve(Obj o) {
  const auto type = o.req<std::string>("type");
  Curve c = Curve::zero();
  try {
    if (type == "leaky_bucket") {
      if (o.has("burst_packets")) {
        c = Curve::leaky_bucket(o.req<double>("rate_pps"), o.req<double>("burst_packets"), Unit::packets);
      } else {
        const double rate = o.has("rate_bps") ? o.req<double>("rate_bps") / 8 : o.req<double>("rate_Bps");
        c = Curve::leaky_bucket(rate, o.req<double>("burst_bytes"), Unit::bytes);
      }
    } else if (type == "rate_latency") {
      const double rate = o.has("rate_bps") ? o.req<double>("rate_bps") / 8 : o.req<double>("rate_Bps");
      c = Curve::rate_latency(rate, o.duration("latency"), Unit::bytes);
    } else if (type == "staircase") {
      const Seconds period = o.duration("period");
      if (o.has("burst_packets"))
        c = Curve::staircase(o.req<double>("burst_packets"), period, o.req<double>("increment_packets"), Unit::packets);
      else
        c = Curve::staircase(o.req<double>("burst_bytes"), period, o.req<double>("increment_bytes"), Unit::bytes);
    } else if (type == "shifted") {
      c = Curve::shifted(read_curve(o.child("inner")), o.duration("offset"), o.opt<double>("scale", 1.0));
    } else if (type == "min" || type == "sum") {
      const Json& parts = o.get("parts");
      if (!parts.is_array() || parts.empty()) o.fail("'parts' must be a non-empty array", o.ptr("parts"));
      std::vector<Curve> cs;
      for (std::size_t i = 0; i < parts.size(); ++i)
        cs.push_back(read_curve(Obj(parts[i], o.ptr("parts") + "/" + std::to_string(i), o.source())));
      if (type == "sum") {
        c = Curve::sum(cs, cs[0].unit());
      } else {
        c = cs[0];
        for (std::size_t i = 1; i < cs.size(); ++i) c = Curve::min(c, cs[i]);
      }
    } else {
      o.fail("unknown curve type '" + type + "'", o.ptr("type"));
    }
  } catch (const DomainError& e) {
    o.fail(e.what());
  }
  o.done();
  return c;
}

inline ClockModel read_clock(Obj o) {
  ClockModel c;
  if (o.has("preset")) {
    try {
      c = clock_preset(o.req<std::string>("preset"));
    } catch (const ConfigError& e) {
      o.fail(e.what(), o.ptr("preset"));
    }
  }
  if (o.has("rho_minus_1")) c.rho = 1.0 + o.req<double>("rho_minus_1");
  if (auto eta = o.duration_opt("eta")) c.eta = *eta;
  if (auto om = o.duration_opt("omega")) c.omega = *om;
  o.done();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    o.fail(e.what());
  }
  return c;
}

inline DamperSpec read_damper(Obj o) {
  DamperSpec d;
  if (o.has("preset")) {
    const auto p = o.req<std::string>("preset");
    if (p == "ideal") {
      d = presets::ideal();
    } else if (p == "hol") {
      d = presets::hol(o.duration("delta_l"), o.duration("delta_u"), o.duration("phi_min", 0.0), o.duration("phi_max", 0.0));
    } else {
      const Seconds g = o.duration("granularity"), e = o.duration("epsilon");
      if (p == "rcsp") d = presets::rcsp(g, e);
      else if (p == "rgcq") d = presets::rgcq(g, e);
      else if (p == "fopleq") d = presets::fopleq(g, e);
      else if (p == "sced_plus") d = presets::sced_plus(g, e);
      else o.fail("unknown damper preset '" + p + "'", o.ptr("preset"));
    }
  } else {
    const auto v = o.req<std::string>("variant");
    if (v == "ideal") d.variant = DamperVariant::ideal;
    else if (v == "tolerance") d.variant = DamperVariant::tolerance;
    else if (v == "resequencing") d.variant = DamperVariant::resequencing;
    else if (v == "head_of_line") d.variant = DamperVariant::head_of_line;
    else o.fail("unknown damper variant '" + v + "'", o.ptr("variant"));
    d.delta_l = o.duration("delta_l", 0.0);
    d.delta_u = o.duration("delta_u", 0.0);
    d.granularity = o.duration("granularity", 0.0);
    d.phi_min = o.duration("phi_min", 0.0);
    d.phi_max = o.duration("phi_max", 0.0);
    const auto r = o.opt<std::string>("rounding", "none");
    if (r == "none") d.rounding = Rounding::none;
    else if (r == "floor") d.rounding = Rounding::floor;
    else if (r == "ceil") d.rounding = Rounding::ceil;
    else o.fail("unknown rounding '" + r + "'", o.ptr("rounding"));
  }
  const auto h = o.opt<std::string>("header_mode", d.header_mode == HeaderMode::te_stamping ? "te" : "standard");
  if (h == "standard") d.header_mode = HeaderMode::standard;
  else if (h == "te") d.header_mode = HeaderMode::te_stamping;
  else o.fail("unknown header mode '" + h + "'", o.ptr("header_mode"));
  o.done();
  try {
    d.validate();
  } catch (const ConfigError& e) {
    o.fail(e.what());
  }
  return d;
}

inline JcsSpec read_jcs(Obj& o) {
  JcsSpec j;
  j.delta = o.duration("delta");
  j.delta_min = o.duration("delta_min", 0.0);
  j.epsilon = o.duration("epsilon", 0.0);
  j.fifo = o.opt<bool>("fifo", true);
  j.clock_id = o.opt<std::string>("clock_id", "");
  return j;
}

inline BdsSpec read_bds(Obj& o) {
  BdsSpec b;
  b.pi_lower = o.duration("pi_lower");
  b.pi_upper = o.duration("pi_upper");
  b.nu = o.duration("nu", b.pi_upper - b.pi_lower);
  b.fifo = o.opt<bool>("fifo", true);
  return b;
}

inline Element read_element(Obj o) {
  const auto t = o.req<std::string>("type");
  Element e;
  if (t == "jcs") e = read_jcs(o);
  else if (t == "bds") e = read_bds(o);
  else o.fail("element type must be 'jcs' or 'bds'", o.ptr("type"));
  o.done();
  return e;
}

template <typename T, typename F>
T named_or_inline(Obj& o, const std::string& key, const std::map<std::string, T>& named, F read, T def) {
  if (!o.has(key)) return def;
  const Json& v = o.get(key);
  if (v.is_string()) {
    auto it = named.find(v.get<std::string>());
    if (it == named.end()) o.fail("unknown " + key + " '" + v.get<std::string>() + "'", o.ptr(key));
    return it->second;
  }
  return read(Obj(v, o.ptr(key), o.source()));
}

struct Named {
  std::map<std::string, ClockModel> clocks;
  std::map<std::string, DamperSpec> dampers;
};

inline Block read_block(Obj o, const Named& n, const ClockModel& def_clock, const DamperSpec& def_damper) {
  Block b;
  b.id = o.opt<std::string>("id", "");
  b.clock = named_or_inline(o, "clock", n.clocks, read_clock, def_clock);
  b.damper = named_or_inline(o, "damper", n.dampers, read_damper, def_damper);
  if (o.has("distinct_clocks")) b.distinct_clock_count = o.req<int>("distinct_clocks");
  const Json& els = o.get("elements");
  if (!els.is_array()) o.fail("'elements' must be an array", o.ptr("elements"));
  for (std::size_t i = 0; i < els.size(); ++i)
    b.elements.push_back(read_element(Obj(els[i], o.ptr("elements") + "/" + std::to_string(i), o.source())));
  o.done();
  try {
    b.validate();
  } catch (const ConfigError& e) {
    o.fail(e.what());
  }
  return b;
}

}  // namespace cfg

// Expected figures attached to a flow; zero means not checked.
struct Expectation {
  Seconds d_upper = 0, d_upper_tol = 0;
  Seconds jitter = 0, jitter_tol = 0;
  Seconds te_jitter = 0, te_jitter_tol = 0;
};

struct FlowConfig {
  std::string name;
  std::vector<Block> blocks;
  std::vector<BdsSpec> tail;
  std::optional<Curve> alpha_packets;
  std::optional<Expectation> expect;
};

struct SimulationConfig {
  std::size_t packets = 1000;
  std::uint64_t seed = 1;
  SourceSpec source;
  TrajectoryMode clock_mode = TrajectoryMode::random;
  ErrorMode error_mode = ErrorMode::random;
  ReleasePin pin = ReleasePin::random;
};

struct NetworkConfig {
  NetworkSpec network;
  std::vector<std::pair<std::string, Deployment>> deployments;
};

struct Config {
  int schema = 1;
  std::vector<FlowConfig> flows;
  std::optional<SimulationConfig> simulation;
  std::optional<NetworkConfig> network;
};

namespace cfg {

inline SourceSpec read_source(Obj o) {
  SourceSpec s;
  const auto k = o.opt<std::string>("kind", "periodic");
  if (k == "periodic") s.kind = SourceKind::periodic;
  else if (k == "back_to_back") s.kind = SourceKind::back_to_back;
  else if (k == "bounded_random") s.kind = SourceKind::bounded_random;
  else o.fail("unknown source kind '" + k + "'", o.ptr("kind"));
  s.burst = o.opt<int>("burst", 1);
  s.period = to_ps(o.duration("period"));
  s.gap = to_ps(o.duration("gap", 0.0));
  s.start = to_ps(o.duration("start", 1 * kMs));
  o.done();
  return s;
}

inline SimulationConfig read_simulation(Obj o) {
  SimulationConfig s;
  s.packets = o.opt<std::size_t>("packets", 1000);
  s.seed = o.opt<std::uint64_t>("seed", 1);
  if (o.has("source")) s.source = read_source(o.child("source"));
  try {
    s.clock_mode = trajectory_mode_from(o.opt<std::string>("clock_mode", "random"));
  } catch (const ConfigError& e) {
    o.fail(e.what(), o.ptr("clock_mode"));
  }
  const auto em = o.opt<std::string>("error_mode", "random");
  if (em == "random") s.error_mode = ErrorMode::random;
  else if (em == "plus") s.error_mode = ErrorMode::adversarial_plus;
  else if (em == "minus") s.error_mode = ErrorMode::adversarial_minus;
  else if (em == "zero") s.error_mode = ErrorMode::zero;
  else o.fail("unknown error mode '" + em + "'", o.ptr("error_mode"));
  const auto pin = o.opt<std::string>("pin", "random");
  if (pin == "random") s.pin = ReleasePin::random;
  else if (pin == "earliest") s.pin = ReleasePin::earliest;
  else if (pin == "latest") s.pin = ReleasePin::latest;
  else o.fail("unknown release pin '" + pin + "'", o.ptr("pin"));
  o.done();
  return s;
}

inline Expectation read_expect(Obj o) {
  Expectation e;
  e.d_upper = o.duration("d_upper", 0.0);
  e.d_upper_tol = o.duration("d_upper_tol", 0.0);
  e.jitter = o.duration("jitter", 0.0);
  e.jitter_tol = o.duration("jitter_tol", 0.0);
  e.te_jitter = o.duration("te_jitter", 0.0);
  e.te_jitter_tol = o.duration("te_jitter_tol", 0.0);
  o.done();
  return e;
}

inline FlowConfig read_flow(Obj o, const Named& n, const ClockModel& def_clock, const DamperSpec& def_damper) {
  FlowConfig f;
  f.name = o.req<std::string>("name");
  const Json& bs = o.get("blocks");
  if (!bs.is_array() || bs.empty()) o.fail("'blocks' must be a non-empty array", o.ptr("blocks"));
  for (std::size_t i = 0; i < bs.size(); ++i)
    f.blocks.push_back(read_block(Obj(bs[i], o.ptr("blocks") + "/" + std::to_string(i), o.source()), n, def_clock, def_damper));
  if (o.has("tail")) {
    const Json& t = o.get("tail");
    if (!t.is_array()) o.fail("'tail' must be an array", o.ptr("tail"));
    for (std::size_t i = 0; i < t.size(); ++i) {
      Obj e(t[i], o.ptr("tail") + "/" + std::to_string(i), o.source());
      if (e.req<std::string>("type") != "bds") e.fail("tail elements must be BDS");
      f.tail.push_back(read_bds(e));
      e.done();
    }
  }
  if (o.has("alpha_packets")) f.alpha_packets = read_curve(o.child("alpha_packets"));
  if (o.has("expect")) f.expect = read_expect(o.child("expect"));
  o.done();
  return f;
}

inline NetworkConfig read_network(Obj o, const ClockModel& def_clock) {
  NetworkConfig nc;
  NetworkSpec& net = nc.network;
  if (o.has("preset")) {
    if (o.req<std::string>("preset") != "orion") o.fail("unknown network preset", o.ptr("preset"));
    net = orion_network();
  } else {
    const Json& nodes = o.get("nodes");
    if (!nodes.is_array()) o.fail("'nodes' must be an array", o.ptr("nodes"));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Obj no(nodes[i], o.ptr("nodes") + "/" + std::to_string(i), o.source());
      NodeSpec ns;
      const auto name = no.req<std::string>("name");
      ns.beta = read_curve(no.child("beta"));
      Obj fo = no.child("fabric");
      ns.fabric = read_jcs(fo);
      fo.done();
      no.done();
      net.nodes[name] = ns;
    }
    Obj lo = o.child("link");
    net.link = read_bds(lo);
    lo.done();
    Obj ho = o.child("host_link");
    net.host_link = read_bds(ho);
    ho.done();
    net.clock = o.has("clock") ? read_clock(o.child("clock")) : def_clock;
    net.epsilon = o.duration("epsilon", 0.0);
    const Json& flows = o.get("flows");
    if (!flows.is_array() || flows.empty()) o.fail("'flows' must be a non-empty array", o.ptr("flows"));
    for (std::size_t i = 0; i < flows.size(); ++i) {
      Obj fo2(flows[i], o.ptr("flows") + "/" + std::to_string(i), o.source());
      FlowSpec f;
      f.name = fo2.req<std::string>("name");
      f.src_host = fo2.opt<std::string>("src", "src_" + f.name);
      f.dst_host = fo2.opt<std::string>("dst", "dst_" + f.name);
      f.path = fo2.req<std::vector<std::string>>("path");
      f.alpha = read_curve(fo2.child("alpha"));
      f.alpha_packets = read_curve(fo2.child("alpha_packets"));
      f.l_min = fo2.opt<double>("l_min_bytes", 0.0);
      f.l_max = fo2.opt<double>("l_max_bytes", 0.0);
      fo2.done();
      net.flows.push_back(std::move(f));
    }
  }
  if (o.has("deployments")) {
    const Json& ds = o.get("deployments");
    if (!ds.is_array()) o.fail("'deployments' must be an array", o.ptr("deployments"));
    for (std::size_t i = 0; i < ds.size(); ++i) {
      Obj d(ds[i], o.ptr("deployments") + "/" + std::to_string(i), o.source());
      Deployment dep;
      const auto kind = d.req<std::string>("kind");
      try {
        dep.kind = deployment_kind_from(kind);
      } catch (const ConfigError& e) {
        d.fail(e.what(), d.ptr("kind"));
      }
      dep.fabric_fifo = d.opt<bool>("fabric_fifo", true);
      dep.damper = d.has("damper") ? read_damper(d.child("damper")) : orion_deployment(dep.kind, dep.fabric_fifo).damper;
      if (dep.kind == DeploymentKind::rgcq_te) dep.damper.header_mode = HeaderMode::te_stamping;
      nc.deployments.emplace_back(d.opt<std::string>("name", kind), dep);
      d.done();
    }
  }
  o.done();
  try {
    net.validate();
  } catch (const ConfigError& e) {
    o.fail(e.what());
  }
  return nc;
}

}  // namespace cfg

inline Config parse_config(const std::string& text, const std::string& name = "<config>") {
  cfg::Source src;
  src.name = name;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // byte offset -> line:col
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
  }
  src.index = PositionIndex(text);
  cfg::Obj root(j, "", src);
  Config c;
  c.schema = root.req<int>("schema");
  if (c.schema != 1) root.fail("unsupported schema version", "/schema");

  cfg::Named named;
  if (root.has("clocks")) {
    cfg::Obj cs = root.child("clocks");
    for (auto it = j["clocks"].begin(); it != j["clocks"].end(); ++it) named.clocks[it.key()] = cfg::read_clock(cs.child(it.key()));
    cs.done();
  }
  if (root.has("dampers")) {
    cfg::Obj ds = root.child("dampers");
    for (auto it = j["dampers"].begin(); it != j["dampers"].end(); ++it)
      named.dampers[it.key()] = cfg::read_damper(ds.child(it.key()));
    ds.done();
  }
  const ClockModel def_clock = named.clocks.count("default") ? named.clocks["default"] : ClockModel::ideal();
  const DamperSpec def_damper = named.dampers.count("default") ? named.dampers["default"] : presets::ideal();

  if (root.has("flows")) {
    const Json& fs = root.get("flows");
    if (!fs.is_array()) root.fail("'flows' must be an array", "/flows");
    for (std::size_t i = 0; i < fs.size(); ++i)
      c.flows.push_back(cfg::read_flow(cfg::Obj(fs[i], "/flows/" + std::to_string(i), src), named, def_clock, def_damper));
  }
  if (root.has("simulation")) c.simulation = cfg::read_simulation(root.child("simulation"));
  if (root.has("network")) c.network = cfg::read_network(root.child("network"), def_clock);
  root.done();
  if (c.flows.empty() && !c.network) root.fail(root.has("flows") ? "flow list is empty" : "config needs 'flows' or 'network'", root.has("flows") ? "/flows" : "");
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

// ---- writers (durations in ns)

// whole picoseconds, written in ns
inline Json duration_json(Seconds s) { return std::isinf(s) ? Json(nullptr) : Json(static_cast<double>(to_ps(s)) / 1000.0); }

inline Json to_json(const Curve& c) {
  const bool pk = c.unit() == Unit::packets;
  return std::visit(
      [&](const auto& s) -> Json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, shape::LeakyBucket>) {
          if (pk) return {{"type", "leaky_bucket"}, {"rate_pps", s.rate}, {"burst_packets", s.burst}};
          return {{"type", "leaky_bucket"}, {"rate_Bps", s.rate}, {"burst_bytes", s.burst}};
        } else if constexpr (std::is_same_v<S, shape::RateLatency>) {
          return {{"type", "rate_latency"}, {"rate_Bps", s.rate}, {"latency_ns", duration_json(s.latency)}};
        } else if constexpr (std::is_same_v<S, shape::Staircase>) {
          if (pk)
            return {{"type", "staircase"}, {"burst_packets", s.burst}, {"period_ns", duration_json(s.period)}, {"increment_packets", s.increment}};
          return {{"type", "staircase"}, {"burst_bytes", s.burst}, {"period_ns", duration_json(s.period)}, {"increment_bytes", s.increment}};
        } else if constexpr (std::is_same_v<S, shape::Shifted>) {
          return {{"type", "shifted"}, {"inner", to_json(*s.inner)}, {"offset_ns", duration_json(s.offset)}, {"scale", s.scale}};
        } else if constexpr (std::is_same_v<S, shape::Min>) {
          return {{"type", "min"}, {"parts", Json::array({to_json(*s.left), to_json(*s.right)})}};
        } else {
          Json parts = Json::array();
          for (const auto& p : s.parts) parts.push_back(to_json(*p));
          return {{"type", "sum"}, {"parts", parts}};
        }
      },
      c.rep());
}


inline Json to_json(const ClockModel& c) {
  return {{"rho_minus_1", std::round((c.rho - 1) * 1e15) / 1e15}, {"eta_ns", duration_json(c.eta)}, {"omega_ns", duration_json(c.omega)}};
}

inline Json to_json(const DamperSpec& d) {
  const char* r = d.rounding == Rounding::floor ? "floor" : d.rounding == Rounding::ceil ? "ceil" : "none";
  return {{"variant", to_string(d.variant)}, {"delta_l_ns", duration_json(d.delta_l)},
          {"delta_u_ns", duration_json(d.delta_u)}, {"granularity_ns", duration_json(d.granularity)},
          {"phi_min_ns", duration_json(d.phi_min)}, {"phi_max_ns", duration_json(d.phi_max)},
          {"rounding", r}, {"header_mode", d.header_mode == HeaderMode::te_stamping ? "te" : "standard"}};
}

inline Json to_json(const JcsSpec& j) {
  return {{"type", "jcs"}, {"delta_ns", duration_json(j.delta)}, {"delta_min_ns", duration_json(j.delta_min)}, {"epsilon_ns", duration_json(j.epsilon)},
          {"fifo", j.fifo}, {"clock_id", j.clock_id}};
}

inline Json to_json(const BdsSpec& b) {
  return {{"type", "bds"}, {"pi_lower_ns", duration_json(b.pi_lower)}, {"pi_upper_ns", duration_json(b.pi_upper)}, {"nu_ns", duration_json(b.nu)}, {"fifo", b.fifo}};
}

inline Json to_json(const Block& b) {
  Json els = Json::array();
  for (const auto& e : b.elements) els.push_back(std::visit([](const auto& x) { return to_json(x); }, e));
  Json o = {{"id", b.id}, {"clock", to_json(b.clock)}, {"damper", to_json(b.damper)}, {"elements", els}};
  if (b.distinct_clock_count) o["distinct_clocks"] = *b.distinct_clock_count;
  return o;
}

inline Json to_json(const FlowConfig& f) {
  Json blocks = Json::array();
  for (const auto& b : f.blocks) blocks.push_back(to_json(b));
  Json o = {{"name", f.name}, {"blocks", blocks}};
  if (!f.tail.empty()) {
    Json t = Json::array();
    for (const auto& b : f.tail) t.push_back(to_json(b));
    o["tail"] = t;
  }
  if (f.alpha_packets) o["alpha_packets"] = to_json(*f.alpha_packets);
  if (f.expect) {
    const auto& e = *f.expect;
    o["expect"] = {{"d_upper_ns", duration_json(e.d_upper)}, {"d_upper_tol_ns", duration_json(e.d_upper_tol)}, {"jitter_ns", duration_json(e.jitter)},
                   {"jitter_tol_ns", duration_json(e.jitter_tol)}, {"te_jitter_ns", duration_json(e.te_jitter)}, {"te_jitter_tol_ns", duration_json(e.te_jitter_tol)}};
  }
  return o;
}

inline Json to_json(const NetworkConfig& nc) {
  const NetworkSpec& n = nc.network;
  Json nodes = Json::array();
  for (const auto& [name, ns] : n.nodes) {
    Json fab = to_json(ns.fabric);
    fab.erase("type");
    nodes.push_back({{"name", name}, {"beta", to_json(ns.beta)}, {"fabric", fab}});
  }
  Json flows = Json::array();
  for (const auto& f : n.flows)
    flows.push_back({{"name", f.name}, {"src", f.src_host}, {"dst", f.dst_host}, {"path", f.path}, {"alpha", to_json(f.alpha)},
                     {"alpha_packets", to_json(f.alpha_packets)}, {"l_min_bytes", f.l_min}, {"l_max_bytes", f.l_max}});
  auto bds = [](const BdsSpec& b) {
    Json j = to_json(b);
    j.erase("type");
    return j;
  };
  Json o = {{"nodes", nodes}, {"link", bds(n.link)}, {"host_link", bds(n.host_link)}, {"clock", to_json(n.clock)},
            {"epsilon_ns", duration_json(n.epsilon)}, {"flows", flows}};
  Json deps = Json::array();
  for (const auto& [name, d] : nc.deployments)
    deps.push_back({{"name", name}, {"kind", to_string(d.kind)}, {"fabric_fifo", d.fabric_fifo}, {"damper", to_json(d.damper)}});
  o["deployments"] = deps;
  return o;
}

inline Json to_json(const Config& c) {
  Json o = {{"schema", c.schema}};
  if (!c.flows.empty()) {
    Json fs = Json::array();
    for (const auto& f : c.flows) fs.push_back(to_json(f));
    o["flows"] = fs;
  }
  if (c.simulation) {
    const auto& s = *c.simulation;
    const char* kinds[] = {"periodic", "back_to_back", "bounded_random"};
    const char* modes[] = {"random", "fast_adversarial", "slow_adversarial", "sync_adversarial_fast", "sync_adversarial_slow"};
    const char* errs[] = {"random", "plus", "minus", "zero"};
    const char* pins[] = {"random", "earliest", "latest"};
    o["simulation"] = {{"packets", s.packets},
                       {"seed", s.seed},
                       {"source",
                        {{"kind", kinds[static_cast<int>(s.source.kind)]},
                         {"burst", s.source.burst},
                         {"period_ns", static_cast<double>(s.source.period) / kPsPerNs},
                         {"gap_ns", static_cast<double>(s.source.gap) / kPsPerNs},
                         {"start_ns", static_cast<double>(s.source.start) / kPsPerNs}}},
                       {"clock_mode", modes[static_cast<int>(s.clock_mode)]},
                       {"error_mode", errs[static_cast<int>(s.error_mode)]},
                       {"pin", pins[static_cast<int>(s.pin)]}};
  }
  if (c.network) o["network"] = to_json(*c.network);
  return o;
}

}  // namespace damperlab
