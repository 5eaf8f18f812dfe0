#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spectrack/ops.hpp"
#include "spectrack/params.hpp"

namespace spectrack {

struct AttentionOptions {
  std::size_t heads = 4;
  /// Side of the square attention window in tokens; requires a square grid.
  std::optional<std::size_t> window;
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
};

/// Registers `<prefix>.attn.{wq,bq,wk,bk,wv,bv,wo,bo}`, `<prefix>.ln1.{g,b}`,
/// `<prefix>.mlp.{w1,b1,w2,b2}` and `<prefix>.ln2.{g,b}`.
void init_attention_block(ParamSet& params, const std::string& prefix, std::size_t d,
                          std::size_t mlp_hidden, std::mt19937_64& rng);

/// Post-norm transformer block:
///   h = LN1(x + MHA(x)),  out = LN2(h + MLP(h)).
/// Scores are scaled by 1/sqrt(d/heads). With `opt.window`, each token only
/// attends inside its non-overlapping window×window tile of the token grid.
Var attention_block(ParamBinder& bind, const std::string& prefix, Var tokens,
                    const AttentionOptions& opt);

/// Same block with queries from `queries` and keys/values from `memory`.
Var cross_attention_block(ParamBinder& bind, const std::string& prefix, Var queries, Var memory,
                          std::size_t heads);

/// Row-major M×M mask; true where query and key share a window.
std::vector<bool> window_mask(std::size_t grid_h, std::size_t grid_w, std::size_t window);

/// Throws ConfigError unless d is divisible by heads.
void check_heads(std::size_t d, std::size_t heads);

}  // namespace spectrack
