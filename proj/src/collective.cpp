#include "tbik/collective.hpp"

#include <bit>

#include "tbik/errors.hpp"
#include "tbik/matmul.hpp"
#include "tbik/threading.hpp"

namespace tbik {

DeviceGroup::DeviceGroup(int world_size) : world_size_(world_size) {
  if (!is_power_of_two(world_size)) {
    fail(ErrorCode::BadWorldSize, "world size must be a power of two, got " +
                                      std::to_string(world_size));
  }
}

namespace {

void require_uniform(const DeviceGroup& group,
                     const std::vector<Matrix>& x_per_rank) {
  if (static_cast<int>(x_per_rank.size()) != group.world_size()) {
    fail(ErrorCode::CollectiveMismatch,
         "expected " + std::to_string(group.world_size()) +
             " contributions, got " + std::to_string(x_per_rank.size()));
  }
  const Matrix& ref = x_per_rank[0];
  for (std::size_t r = 1; r < x_per_rank.size(); ++r) {
    const Matrix& m = x_per_rank[r];
    if (m.rows() != ref.rows() || m.cols() != ref.cols() ||
        m.dtype() != ref.dtype()) {
      fail(ErrorCode::CollectiveMismatch,
           "rank " + std::to_string(r) + " contribution shape/dtype differs");
    }
  }
}

void add_into(std::vector<float>& dst, const std::vector<float>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = add_f32(dst[i], src[i]);
  }
}

}  // namespace

std::vector<Matrix> all_gather(const DeviceGroup& group,
                               const std::vector<Matrix>& x_per_rank) {
  require_uniform(group, x_per_rank);
  return x_per_rank;  // mailbox slots, indexed by source rank
}

std::vector<Matrix> tree_all_reduce_per_rank(
    const DeviceGroup& group, const std::vector<Matrix>& x_per_rank) {
  const std::vector<Matrix> gathered = all_gather(group, x_per_rank);
  if (gathered[0].dtype() != Dtype::F32) {
    fail(ErrorCode::CollectiveMismatch, "tree_all_reduce expects f32 inputs");
  }
  const int W = group.world_size();
  std::vector<Matrix> results(static_cast<std::size_t>(W));

  parallel_for(W, [&](std::int64_t rank) {
    // Each rank reduces its own copy of the gathered list.
    std::vector<std::vector<float>> local;
    local.reserve(static_cast<std::size_t>(W));
    for (const Matrix& m : gathered) local.push_back(m.f32_data());

    const int rounds = std::bit_width(static_cast<unsigned>(W)) - 1;
    for (int l = 1; l <= rounds; ++l) {
      const int stride = 1 << l;
      for (int left = 0; left < W; left += stride) {
        const int right = left + (1 << (l - 1));
        add_into(local[left], local[right]);
      }
    }
    results[static_cast<std::size_t>(rank)] = Matrix::from_f32(
        gathered[0].rows(), gathered[0].cols(), std::move(local[0]));
  });

  for (int r = 1; r < W; ++r) {
    if (!bit_equal(results[0], results[static_cast<std::size_t>(r)])) {
      fail(ErrorCode::CollectiveMismatch,
           "tree_all_reduce produced rank-divergent results at rank " +
               std::to_string(r));
    }
  }
  return results;
}

Matrix tree_all_reduce(const DeviceGroup& group,
                       const std::vector<Matrix>& x_per_rank) {
  return tree_all_reduce_per_rank(group, x_per_rank)[0];
}

Matrix ring_reduce_baseline(const DeviceGroup& group,
                            const std::vector<Matrix>& x_per_rank) {
  require_uniform(group, x_per_rank);
  if (x_per_rank[0].dtype() != Dtype::F32) {
    fail(ErrorCode::CollectiveMismatch, "ring_reduce expects f32 inputs");
  }
  std::vector<float> acc = x_per_rank[0].f32_data();
  for (std::size_t r = 1; r < x_per_rank.size(); ++r) {
    add_into(acc, x_per_rank[r].f32_data());
  }
  return Matrix::from_f32(x_per_rank[0].rows(), x_per_rank[0].cols(),
                          std::move(acc));
}

}  // namespace tbik
