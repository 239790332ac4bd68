#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace tentlab {

/// TENTLAB_WORKERS if set to a positive integer, else the logical core count.
std::size_t default_workers();

/// splitmix64 of (master, index); used to give every task its own stream so
/// results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Runs fn(0..n-1) on up to `workers` threads pulling indices from a shared
/// counter. The first exception thrown by any task is rethrown after all
/// workers join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace tentlab
