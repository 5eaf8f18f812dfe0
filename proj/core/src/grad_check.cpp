#include "spectrack/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "spectrack/error.hpp"

namespace spectrack {

double evaluate(const ScalarLoss& f, const ParamSet& params) {
  Tape tape;
  ParamBinder bind(tape, params, /*trainable=*/false);
  Var out = f(bind);
  if (out.rows() != 1 || out.cols() != 1) {
    throw DimensionError("grad_check: loss must be 1x1, got " + out.value().shape_str());
  }
  return out.value()[0];
}

GradCheckReport grad_check(const ScalarLoss& f, const ParamSet& params,
                           const GradCheckOptions& options) {
  if (!(options.eps > 0.0)) throw DomainError("grad_check: eps must be positive");

  Tape tape;
  ParamBinder bind(tape, params);
  Var loss = f(bind);
  if (!std::isfinite(loss.value()[0])) {
    throw NumericError("grad_check: loss is not finite at the unperturbed point");
  }
  const double floor = options.denom_floor * std::max(1.0, std::abs(loss.value()[0]));
  tape.backward(loss);
  const ParamSet analytic = bind.gradients();

  std::mt19937_64 rng(options.seed);
  ParamSet probe = params;
  GradCheckReport report;
  for (const auto& entry : params) {
    if (std::find(options.skip.begin(), options.skip.end(), entry.name) != options.skip.end()) continue;
    const Matrix& grad = analytic.at(entry.name);
    std::vector<std::size_t> idx(entry.value.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (options.max_probes_per_block != 0 && idx.size() > options.max_probes_per_block) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(options.max_probes_per_block);
      std::sort(idx.begin(), idx.end());
    }
    BlockReport block{entry.name, idx.size(), 0.0};
    Matrix& slot = probe.at(entry.name);
    for (std::size_t i : idx) {
      const double orig = slot[i];
      slot[i] = orig + options.eps;
      const double up = evaluate(f, probe);
      slot[i] = orig - options.eps;
      const double down = evaluate(f, probe);
      slot[i] = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("grad_check: loss not finite when probing " + entry.name + "[" +
                           std::to_string(i) + "]");
      }
      const double numeric = (up - down) / (2.0 * options.eps);
      const double denom = std::max({std::abs(numeric), std::abs(grad[i]), floor});
      block.max_rel_error = std::max(block.max_rel_error, std::abs(numeric - grad[i]) / denom);
    }
    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    report.blocks.push_back(std::move(block));
  }
  report.passed = report.max_rel_error < options.tol;
  return report;
}

}  // namespace spectrack
