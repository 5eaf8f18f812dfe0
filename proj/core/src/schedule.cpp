#include "spectrack/schedule.hpp"

#include <numeric>

#include "spectrack/error.hpp"

namespace spectrack {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void deterministic_shuffle(std::vector<std::size_t>& items, std::uint64_t seed) {
  std::uint64_t state = seed;
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(splitmix64(state) % i);
    std::swap(items[i - 1], items[j]);
  }
}

std::vector<ScheduleItem> modality_schedule(std::span<const std::size_t> sequences_per_modality,
                                            std::uint64_t seed, std::size_t epoch,
                                            ScheduleMode mode) {
  std::size_t total = 0;
  for (std::size_t n : sequences_per_modality) total += n;
  if (total == 0) throw ConfigError("modality schedule: no sequences in any modality");

  std::vector<std::vector<std::size_t>> orders;
  for (std::size_t m = 0; m < sequences_per_modality.size(); ++m) {
    std::vector<std::size_t> order(sequences_per_modality[m]);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::uint64_t mix = seed ^ (0x100000001B3ull * (epoch + 1)) ^ (0xC2B2AE3D27D4EB4Full * (m + 1));
    deterministic_shuffle(order, splitmix64(mix));
    orders.push_back(std::move(order));
  }

  std::vector<ScheduleItem> out;
  out.reserve(total);
  if (mode == ScheduleMode::blocked) {
    for (std::size_t m = 0; m < orders.size(); ++m)
      for (std::size_t s : orders[m]) out.push_back({m, s});
    return out;
  }
  for (std::size_t round = 0; out.size() < total; ++round) {
    for (std::size_t m = 0; m < orders.size(); ++m) {
      if (round < orders[m].size()) out.push_back({m, orders[m][round]});
    }
  }
  return out;
}

}  // namespace spectrack
