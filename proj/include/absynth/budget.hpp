#pragma once

#include <chrono>
#include <cstddef>
#include <optional>

#include "absynth/errors.hpp"

namespace absynth {

/// Size/time budget threaded through quantifier elimination. The node
/// counter is cumulative over one top-level operation.
struct Budget {
  using Clock = std::chrono::steady_clock;

  std::optional<Clock::time_point> deadline;
  size_t maxNodes = 10'000'000;
  size_t usedNodes = 0;

  static Budget unlimited() {
    Budget b;
    b.maxNodes = static_cast<size_t>(-1);
    return b;
  }
  static Budget withSeconds(double seconds, size_t maxNodes = 10'000'000) {
    Budget b;
    b.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(seconds));
    b.maxNodes = maxNodes;
    return b;
  }

  /// `size` is the node count of an intermediate result.
  void checkSize(size_t size) {
    if (size > usedNodes) usedNodes = size;
    if (size > maxNodes) throw ResourceLimit("formula size budget");
    checkTime();
  }
  void checkTime() const {
    if (deadline && Clock::now() > *deadline) throw ResourceLimit("time budget");
  }
};

}  // namespace absynth
