#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spectrack/params.hpp"

namespace spectrack {

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  /// Entries probed per block; 0 probes every entry. Probes are drawn
  /// without replacement from a generator seeded with `seed`.
  std::size_t max_probes_per_block = 0;
  std::uint64_t seed = 0;
  /// Lower bound on the relative-error denominator, scaled by max(1, |f|).
  /// Central differences cannot resolve gradients below about |f|·u/eps.
  double denom_floor = 1e-6;
  /// Blocks left out of the comparison (still part of the loss).
  std::vector<std::string> skip;
};

struct BlockReport {
  std::string name;
  std::size_t probes = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<BlockReport> blocks;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Builds a 1×1 loss on the binder's tape.
using ScalarLoss = std::function<Var(ParamBinder&)>;

/// Compares tape gradients against central differences
/// (f(p + eps) − f(p − eps)) / 2eps. Throws NumericError naming the block and
/// entry when f is not finite at a probe.
GradCheckReport grad_check(const ScalarLoss& f, const ParamSet& params,
                           const GradCheckOptions& options = {});

/// Value of f at `params` without recording gradients.
double evaluate(const ScalarLoss& f, const ParamSet& params);

}  // namespace spectrack
