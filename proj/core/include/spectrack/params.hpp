#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "spectrack/matrix.hpp"
#include "spectrack/tape.hpp"

namespace spectrack {

/// Named parameter blocks in registration order.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Matrix value;
  };

  void add(std::string name, Matrix value);
  /// Adds or replaces.
  void set(std::string name, Matrix value);
  bool contains(std::string_view name) const;
  Matrix& at(std::string_view name);
  const Matrix& at(std::string_view name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const noexcept;
  auto begin() noexcept { return entries_.begin(); }
  auto end() noexcept { return entries_.end(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  /// Same names and shapes, all zeros.
  ParamSet zeros_like() const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

inline bool operator==(const ParamSet::Entry& a, const ParamSet::Entry& b) {
  return a.name == b.name && a.value == b.value;
}

/// Lazily lifts parameters onto a tape; each name maps to exactly one leaf,
/// so a block used by several branches accumulates a single gradient.
class ParamBinder {
 public:
  ParamBinder(Tape& tape, const ParamSet& params, bool trainable = true)
      : tape_(tape), params_(params), trainable_(trainable) {}

  Var operator()(std::string_view name);
  Tape& tape() noexcept { return tape_; }
  const ParamSet& params() const noexcept { return params_; }

  /// Gradient per parameter after `tape.backward`; exact zeros for blocks
  /// that were never bound.
  ParamSet gradients() const;

 private:
  Tape& tape_;
  const ParamSet& params_;
  bool trainable_;
  std::map<std::string, Var, std::less<>> bound_;
};

/// Gaussian initialisation with standard deviation `stddev`.
Matrix random_normal(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng);

}  // namespace spectrack
