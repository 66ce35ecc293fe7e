#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace minnorm {

/// Worker count from an explicit request, falling back to INTERP_RISK_THREADS.
/// A value of 0 means "use the hardware concurrency".
unsigned resolve_thread_count(unsigned requested = 0);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; callers write results into per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for substream (tag, index) of a master seed.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index);

using Rng = std::mt19937_64;

}  // namespace minnorm
