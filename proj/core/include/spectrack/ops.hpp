#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spectrack/tape.hpp"

namespace spectrack {

// Differentiable primitives. Each records a single node on the tape of its
// first argument; shape violations throw DimensionError naming both shapes.

/// x·w + b for x: M×K, w: K×d, b: 1×d.
Var linear_apply(Var x, Var w, Var b);
Var matmul(Var a, Var b);
/// a·bᵀ
Var matmul_nt(Var a, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
/// Adds a 1×n row to every row of an m×n matrix.
Var add_row(Var a, Var row);

/// Per-row normalization to zero mean, unit variance, then gain·x̂ + shift.
Var layer_norm(Var x, Var gain, Var shift, double eps = 1e-5);

/// Row softmax. Entries with `mask[i*cols+j] == false` get probability 0.
Var softmax_rows(Var x, const std::vector<bool>* mask = nullptr);

Var gelu(Var x);
Var sigmoid(Var x);
Var softplus(Var x);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);

Var sum(Var a);
Var mean(Var a);

/// Per-token convex blend alpha_i·fc_i + (1 − alpha_i)·hsi_i with alpha: M×1.
/// Throws DomainError if any alpha lies outside [0, 1].
Var fuse_tokens(Var z_fc, Var z_hsi, Var alpha);

/// Mean binary cross-entropy of sigmoid(logits) against 0/1 targets.
Var bce_with_logits(Var logits, const Matrix& targets);
/// Weighted mean Σ w·ℓ / Σ w; weights must be non-negative with a positive sum.
Var bce_with_logits(Var logits, const Matrix& targets, const Matrix& weights);
/// 1 − IoU for boxes in corner form (x1, y1, x2, y2), pred: 1×4.
Var iou_loss(Var pred, const Matrix& target);
/// Mean absolute difference.
Var l1_loss(Var pred, const Matrix& target);

// Scalar helpers shared with non-tape code.
double sigmoid(double x) noexcept;
double softplus(double x) noexcept;

}  // namespace spectrack
