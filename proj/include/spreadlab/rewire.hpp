#pragma once

#include <cstdint>
#include <string>

#include "spreadlab/graph.hpp"

namespace spreadlab::rewire {

struct RewireResult {
  SpatialGraph graph;
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  std::string warning;  // empty unless the chain could not run
};

/// Switch chain: sweeps * |E| proposals, each picking two distinct edges
/// (u, v), (u', v') uniformly, orienting the second at random and replacing
/// both by (u, u'), (v, v'). Proposals creating a loop or a duplicate edge,
/// or leaving the edge set unchanged, are rejected. Positions and weights
/// are copied; edge lengths are recomputed. Graphs with fewer than two
/// edges are returned unchanged with a warning.
RewireResult switch_rewire(const SpatialGraph& g, std::size_t sweeps, std::uint64_t seed);

struct MixingDiagnostic {
  double edge_jaccard = 0.0;
  double mean_len_ratio = 0.0;  // rewired / original; NaN if the original has no edges
  bool degree_seq_equal = false;
};

/// Throws ValidationError unless both graphs have the same nodes at the same
/// positions.
MixingDiagnostic mixing_diagnostic(const SpatialGraph& original, const SpatialGraph& rewired);

}  // namespace spreadlab::rewire
