#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "recover/repair.hpp"

namespace recover {

// Uniform draw in [0, n) by rejection; same sequence on every platform.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n);

// Blocks reduced to unfrozen base variables of the repair model; empty blocks dropped.
std::vector<Block> restrict_blocks(const RepairModel& rm, const std::vector<Block>& blocks);

struct VnsOutcome {
  Solution best;  // over the repair model
  std::vector<TrajectoryEntry> trajectory;
  std::size_t improvements = 0;
  SolveStats stats;
  std::vector<ChangeRecord> notes;
};

// Shake k random blocks free, re-solve the restricted repair MILP, accept strict
// improvements (k back to 1), otherwise k+1 wrapping at k_max.
VnsOutcome vns_search(const RepairModel& rm, const Solution& start, const std::vector<Block>& blocks,
                      const VnsParams& vns, const SolveParams& params);

}  // namespace recover
