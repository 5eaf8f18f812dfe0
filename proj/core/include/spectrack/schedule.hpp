#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spectrack {

enum class ScheduleMode { round_robin, blocked };

struct ScheduleItem {
  std::size_t modality = 0;
  std::size_t sequence = 0;

  friend bool operator==(const ScheduleItem&, const ScheduleItem&) = default;
};

/// Training order for one epoch. Each modality's sequence indices are
/// shuffled with a generator derived from (seed, epoch); round-robin mode
/// then takes one item per modality in turn, skipping exhausted ones, while
/// blocked mode emits each modality's list whole. Every sequence appears
/// exactly once.
std::vector<ScheduleItem> modality_schedule(std::span<const std::size_t> sequences_per_modality,
                                            std::uint64_t seed, std::size_t epoch = 0,
                                            ScheduleMode mode = ScheduleMode::round_robin);

/// In-place Fisher-Yates shuffle driven by splitmix64, identical on every platform.
void deterministic_shuffle(std::vector<std::size_t>& items, std::uint64_t seed);

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace spectrack
