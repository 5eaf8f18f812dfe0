#include "spectrack/attention.hpp"

#include <cmath>

#include "spectrack/error.hpp"

namespace spectrack {

namespace {

Var multi_head(ParamBinder& bind, const std::string& p, Var q_in, Var kv_in, std::size_t heads,
               const std::vector<bool>* mask) {
  const std::size_t d = q_in.cols();
  check_heads(d, heads);
  const std::size_t dh = d / heads;
  const double scale_factor = 1.0 / std::sqrt(static_cast<double>(dh));

  Var q = linear_apply(q_in, bind(p + ".wq"), bind(p + ".bq"));
  Var k = linear_apply(kv_in, bind(p + ".wk"), bind(p + ".bk"));
  Var v = linear_apply(kv_in, bind(p + ".wv"), bind(p + ".bv"));

  std::vector<Var> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = slice_cols(q, h * dh, dh);
    Var kh = slice_cols(k, h * dh, dh);
    Var vh = slice_cols(v, h * dh, dh);
    Var scores = scale(matmul_nt(qh, kh), scale_factor);
    outs.push_back(matmul(softmax_rows(scores, mask), vh));
  }
  Var merged = heads == 1 ? outs.front() : concat_cols(outs);
  return linear_apply(merged, bind(p + ".wo"), bind(p + ".bo"));
}

Var feed_forward(ParamBinder& bind, const std::string& p, Var x) {
  Var h = gelu(linear_apply(x, bind(p + ".w1"), bind(p + ".b1")));
  return linear_apply(h, bind(p + ".w2"), bind(p + ".b2"));
}

Var finish_block(ParamBinder& bind, const std::string& prefix, Var residual, Var attended) {
  Var h = layer_norm(add(residual, attended), bind(prefix + ".ln1.g"), bind(prefix + ".ln1.b"));
  Var f = feed_forward(bind, prefix + ".mlp", h);
  return layer_norm(add(h, f), bind(prefix + ".ln2.g"), bind(prefix + ".ln2.b"));
}

}  // namespace

void check_heads(std::size_t d, std::size_t heads) {
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("embedding size " + std::to_string(d) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
}

void init_attention_block(ParamSet& params, const std::string& prefix, std::size_t d,
                          std::size_t mlp_hidden, std::mt19937_64& rng) {
  const double s_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double s_h = 1.0 / std::sqrt(static_cast<double>(mlp_hidden));
  for (const char* w : {"q", "k", "v", "o"}) {
    params.add(prefix + ".attn.w" + w, random_normal(d, d, s_d, rng));
    params.add(prefix + ".attn.b" + w, Matrix(1, d));
  }
  params.add(prefix + ".ln1.g", Matrix(1, d, 1.0));
  params.add(prefix + ".ln1.b", Matrix(1, d));
  params.add(prefix + ".mlp.w1", random_normal(d, mlp_hidden, s_d, rng));
  params.add(prefix + ".mlp.b1", Matrix(1, mlp_hidden));
  params.add(prefix + ".mlp.w2", random_normal(mlp_hidden, d, s_h, rng));
  params.add(prefix + ".mlp.b2", Matrix(1, d));
  params.add(prefix + ".ln2.g", Matrix(1, d, 1.0));
  params.add(prefix + ".ln2.b", Matrix(1, d));
}

std::vector<bool> window_mask(std::size_t grid_h, std::size_t grid_w, std::size_t window) {
  if (grid_h != grid_w) {
    throw ConfigError("windowed attention needs a square token grid, got " +
                      std::to_string(grid_h) + "x" + std::to_string(grid_w));
  }
  if (window == 0 || grid_h % window != 0) {
    throw ConfigError("token grid side " + std::to_string(grid_h) +
                      " is not divisible by window " + std::to_string(window));
  }
  const std::size_t m = grid_h * grid_w;
  std::vector<bool> mask(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t wa = (a / grid_w) / window * (grid_w / window) + (a % grid_w) / window;
    for (std::size_t b = 0; b < m; ++b) {
      const std::size_t wb = (b / grid_w) / window * (grid_w / window) + (b % grid_w) / window;
      mask[a * m + b] = wa == wb;
    }
  }
  return mask;
}

Var attention_block(ParamBinder& bind, const std::string& prefix, Var tokens,
                    const AttentionOptions& opt) {
  check_heads(tokens.cols(), opt.heads);
  std::vector<bool> mask;
  if (opt.window) {
    if (opt.grid_h * opt.grid_w != tokens.rows()) {
      throw ConfigError("token grid " + std::to_string(opt.grid_h) + "x" +
                        std::to_string(opt.grid_w) + " does not match " +
                        std::to_string(tokens.rows()) + " tokens");
    }
    mask = window_mask(opt.grid_h, opt.grid_w, *opt.window);
  }
  Var attended = multi_head(bind, prefix + ".attn", tokens, tokens, opt.heads,
                            opt.window ? &mask : nullptr);
  return finish_block(bind, prefix, tokens, attended);
}

Var cross_attention_block(ParamBinder& bind, const std::string& prefix, Var queries, Var memory,
                          std::size_t heads) {
  if (queries.cols() != memory.cols()) {
    throw DimensionError("cross attention: query width " + std::to_string(queries.cols()) +
                         " vs memory width " + std::to_string(memory.cols()));
  }
  Var attended = multi_head(bind, prefix + ".attn", queries, memory, heads, nullptr);
  return finish_block(bind, prefix, queries, attended);
}

}  // namespace spectrack
