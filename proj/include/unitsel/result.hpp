#pragma once

#include <cstdint>

#include "unitsel/network.hpp"

namespace unitsel {

struct SolveStats {
  /// Total entries of every factor created during the run (both passes for R-MAP).
  std::uint64_t ve_size = 0;
  int width = 0;
  double elapsed = 0.0;  // seconds
  std::size_t peak_scope = 0;
  /// Circuit engines: edge traversals, leaf evaluations and divisions.
  std::uint64_t ops = 0;
  std::uint64_t subnormals = 0;
};

struct RmapResult {
  Instantiation argmax;
  double value = 0.0;
  SolveStats stats;
};

using MapResult = RmapResult;

}  // namespace unitsel
