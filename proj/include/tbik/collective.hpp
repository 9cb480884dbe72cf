#pragma once

// Simulated device group. Exchange is rank-indexed: a collective is a pure
// function of (world size, contributions), never of submission order or of
// how ranks are scheduled onto workers. The phase boundary between
// contributing and reading back acts as the per-collective barrier.

#include <cstdint>
#include <vector>

#include "tbik/matrix.hpp"

namespace tbik {

class DeviceGroup {
 public:
  explicit DeviceGroup(int world_size);

  int world_size() const { return world_size_; }

 private:
  int world_size_;
};

// Every rank sees the same rank-indexed list R, R[i] bit-equal to rank i's
// contribution.
std::vector<Matrix> all_gather(const DeviceGroup& group,
                               const std::vector<Matrix>& x_per_rank);

// All-gather, then every rank redundantly reduces its local copy pairwise:
// for l = 1 .. bit_length(W)-1, R[left] += R[left + 2^(l-1)] for each left
// stride 2^l. Returns each rank's R[0]; all entries are bit-identical.
std::vector<Matrix> tree_all_reduce_per_rank(
    const DeviceGroup& group, const std::vector<Matrix>& x_per_rank);

// Convenience wrapper returning the (rank-symmetric) reduced matrix.
Matrix tree_all_reduce(const DeviceGroup& group,
                       const std::vector<Matrix>& x_per_rank);

// Left-to-right sequential accumulation across ranks; deterministic stand-in
// for a ring reduction, used only as a divergence baseline.
Matrix ring_reduce_baseline(const DeviceGroup& group,
                            const std::vector<Matrix>& x_per_rank);

}  // namespace tbik
