#pragma once

#include <string>
#include <vector>

#include "bounds.hpp"

namespace damperlab {

// Target figures for the three worked paths, in seconds.
struct ReferenceValues {
  Seconds block_d_upper = 0;  // first block
  Seconds block_jitter = 0;
  Seconds e2e_d_upper = 0;
  Seconds e2e_jitter = 0;
  Seconds te_jitter = 0;
  Seconds errors = 0;  // breakdown of the end-to-end jitter; 0 = not given
  Seconds clocks = 0;
  Seconds basic = 0;
};

struct ReferencePath {
  std::string name;
  std::vector<Block> blocks;
  std::vector<BdsSpec> tail;  // after the last damper
  ReferenceValues target;

  std::vector<PathPart> parts(bool te = false) const {
    std::vector<PathPart> p;
    for (const auto& b : blocks) {
      Block x = b;
      if (te) x.damper.header_mode = HeaderMode::te_stamping;
      p.emplace_back(theorem1_bounds(x));
    }
    for (const auto& t : tail) p.emplace_back(t);
    return p;
  }
  BoundsResult e2e() const { return e2e_sum(parts()); }
  BoundsResult te() const {
    std::vector<Block> bs = blocks;
    for (auto& b : bs) b.damper.header_mode = HeaderMode::te_stamping;
    return theorem2_te_bounds(bs, tail);
  }
};

namespace detail {

inline JcsSpec jcs(Seconds delta, Seconds eps = 50 * kNs) { return {delta, eps, true, "", 0}; }
inline BdsSpec bds(Seconds lo, Seconds hi, Seconds nu) { return {lo, hi, nu, true}; }
inline DamperSpec ref_damper() { return presets::rcsp(998 * kNs, 2 * kNs); }

inline Block ref_block(std::string id, std::vector<Element> els, ClockModel c = ClockModel::free_running()) {
  Block b;
  b.id = std::move(id);
  b.elements = std::move(els);
  b.damper = ref_damper();
  b.clock = c;
  return b;
}

}  // namespace detail

// Seven identical blocks: a 250 us queue, a 5 us link and a 2 us fabric.
inline ReferencePath example1() {
  using namespace detail;
  ReferencePath p;
  p.name = "ex1";
  for (int i = 1; i <= 7; ++i)
    p.blocks.push_back(ref_block("B" + std::to_string(i), {jcs(250 * kUs), bds(5 * kUs, 5 * kUs, 0), jcs(2 * kUs)}));
  p.target = {257.13 * kUs, 1.262 * kUs, 1.799 * kMs, 8.834 * kUs, 2.834 * kUs, 0, 62 * kNs, 1.002 * kUs};
  p.target.errors = 200 * kNs;
  return p;
}

// Source queue, seven hops with a 30 ms backbone segment in the fifth block, and a tail queue.
inline ReferencePath example2() {
  using namespace detail;
  ReferencePath p;
  p.name = "ex2";
  p.blocks.push_back(ref_block("B1", {bds(20 * kUs, 100 * kUs, 80 * kUs), jcs(5 * kUs)}));
  for (int i = 2; i <= 8; ++i) {
    std::vector<Element> els{bds(10 * kUs, 10 * kUs, 0)};
    if (i == 5) els.emplace_back(bds(29 * kMs, 30 * kMs, 1 * kMs));
    els.emplace_back(jcs(500 * kUs));
    els.emplace_back(jcs(5 * kUs));
    p.blocks.push_back(ref_block("B" + std::to_string(i), std::move(els)));
  }
  p.tail.push_back(bds(400 * kUs, 500 * kUs, 100 * kUs));
  p.target = {0, 0, 34.211 * kMs, 1.190 * kMs, 1.183 * kMs, 0, 0, 0};
  return p;
}

// Same route with the backbone as a 30 ms JCS on a synchronized clock and a destination damper.
inline ReferencePath example3() {
  using namespace detail;
  ReferencePath p;
  p.name = "ex3";
  p.blocks.push_back(ref_block("B1", {jcs(100 * kUs), jcs(5 * kUs)}));
  for (int i = 2; i <= 8; ++i) {
    std::vector<Element> els{bds(10 * kUs, 10 * kUs, 0)};
    if (i == 5) els.emplace_back(jcs(30 * kMs, 2.05 * kUs));
    els.emplace_back(jcs(500 * kUs));
    els.emplace_back(jcs(5 * kUs));
    p.blocks.push_back(ref_block("B" + std::to_string(i), std::move(els), i == 5 ? ClockModel::gptp() : ClockModel::free_running()));
  }
  p.blocks.push_back(ref_block("B9", {jcs(500 * kUs)}));
  p.target = {0, 0, 34.216 * kMs, 21.74 * kUs, 13.74 * kUs, 5.8 * kUs, 6.92 * kUs, 9.02 * kUs};
  return p;
}

inline ReferencePath reference_path(int which) {
  switch (which) {
    case 1: return example1();
    case 2: return example2();
    case 3: return example3();
  }
  throw ConfigError("reference path must be 1, 2 or 3");
}

}  // namespace damperlab
