#pragma once

#include <map>
#include <utility>
#include <vector>

#include "polariton/mps.hpp"

namespace polariton::mps::detail {

/// Environment at one bond: per MPO state, blocks keyed by (bra charge, ket charge).
using Env = std::vector<std::map<std::pair<int, int>, Matrix>>;

/// Left boundary: MPO state 0, charge 0 on both layers.
Env left_boundary(const MPO& mpo);
/// Right boundary: last MPO state, target charge on both layers.
Env right_boundary(const MPO& mpo, int target_charge);

/// Absorbs site `site` into a left environment (bond site -> site + 1).
Env extend_left(const Env& env, const MPSState& state, int site, const MPO& mpo);
/// Absorbs site `site` into a right environment (bond site + 1 -> site).
Env extend_right(const Env& env, const MPSState& state, int site, const MPO& mpo);

}  // namespace polariton::mps::detail
