#pragma once

// Block-structured reductions. Work is split into fixed-size blocks whose
// partial results are combined by a pairwise tree in block order, so the
// OpenMP path and the serial reference path produce bitwise-identical output
// for any thread count.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bdfl {

enum class Execution { serial, parallel };

inline constexpr std::int64_t kDefaultBlock = 4096;

/// Reads BDFL_THREADS and caps the OpenMP pool accordingly (no-op when unset).
void apply_thread_cap_from_env();

namespace detail {

// Runs body(i) for i in [0, count); the first exception (lowest index) is
// rethrown on the calling thread.
template <class Body>
void for_each_index(std::int64_t count, Body&& body, Execution exec) {
  if (count <= 0) return;
  if (exec == Execution::serial) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

template <class Acc, class BlockFn, class Merge>
Acc block_reduce(std::int64_t count, std::int64_t block_size, BlockFn&& block_fn, Merge&& merge,
                 Execution exec = Execution::parallel) {
  block_size = std::max<std::int64_t>(1, block_size);
  const std::int64_t blocks = count <= 0 ? 0 : (count + block_size - 1) / block_size;
  if (blocks == 0) return block_fn(0, 0);
  std::vector<Acc> partial(static_cast<std::size_t>(blocks));
  auto one = [&](std::int64_t b) {
    const std::int64_t begin = b * block_size;
    partial[static_cast<std::size_t>(b)] = block_fn(begin, std::min(count, begin + block_size));
  };
  detail::for_each_index(blocks, one, exec);
  // pairwise tree, fixed shape
  for (std::size_t stride = 1; stride < partial.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < partial.size(); i += 2 * stride) merge(partial[i], partial[i + stride]);
  }
  return std::move(partial.front());
}

/// Parallel map over independent items; results stay in item order.
template <class Result, class Fn>
std::vector<Result> ordered_map(std::int64_t count, Fn&& fn, Execution exec = Execution::parallel) {
  std::vector<Result> out(static_cast<std::size_t>(std::max<std::int64_t>(0, count)));
  detail::for_each_index(count, [&](std::int64_t i) { out[static_cast<std::size_t>(i)] = fn(i); }, exec);
  return out;
}

}  // namespace bdfl
