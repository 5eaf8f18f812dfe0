#include "spectrack/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spectrack/error.hpp"

namespace spectrack {

namespace {

Tape& tape_of(Var v) {
  if (v.tape == nullptr) throw Error("op on a detached variable");
  return *v.tape;
}

template <typename F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  Matrix out = spectrack::matmul(a.value(), b.value());
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (a.requires_grad()) tp.accumulate(a, matmul_nt(g, b.value()));
    if (b.requires_grad()) matmul_tn_acc(a.value(), g, tp.grad_buffer(b));
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = tape_of(a);
  Matrix out = spectrack::matmul_nt(a.value(), b.value());
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (a.requires_grad()) tp.accumulate(a, spectrack::matmul(g, b.value()));
    if (b.requires_grad()) matmul_tn_acc(g, a.value(), tp.grad_buffer(b));
  });
}

Var linear_apply(Var x, Var w, Var b) {
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  const Matrix& wv = w.value();
  const Matrix& bv = b.value();
  require_shape(xv.cols() == wv.rows(), "linear_apply(x, w)", xv, wv);
  require_shape(bv.rows() == 1 && bv.cols() == wv.cols(), "linear_apply(w, b)", wv, bv);
  Matrix out = spectrack::matmul(xv, wv);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += bv[j];
  }
  return t.record(std::move(out), {x, w, b}, [x, w, b](Tape& tp, const Matrix& g) {
    if (x.requires_grad()) tp.accumulate(x, matmul_nt(g, w.value()));
    if (w.requires_grad()) matmul_tn_acc(x.value(), g, tp.grad_buffer(w));
    if (b.requires_grad()) {
      Matrix& gb = tp.grad_buffer(b);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  require_shape(a.value().same_shape(b.value()), "add", a.value(), b.value());
  Matrix out = a.value();
  out += b.value();
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  require_shape(a.value().same_shape(b.value()), "sub", a.value(), b.value());
  Matrix out = a.value();
  const Matrix& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (b.requires_grad()) {
      Matrix& gb = tp.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = tape_of(a);
  require_shape(a.value().same_shape(b.value()), "hadamard", a.value(), b.value());
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (a.requires_grad()) {
      Matrix& ga = tp.grad_buffer(a);
      const Matrix& bv = b.value();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (b.requires_grad()) {
      Matrix& gb = tp.grad_buffer(b);
      const Matrix& av = a.value();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  Matrix out = a.value();
  out *= s;
  return t.record(std::move(out), {a}, [a, s](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  require_shape(rv.rows() == 1 && rv.cols() == av.cols(), "add_row", av, rv);
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += rv[j];
  }
  return t.record(std::move(out), {a, row}, [a, row](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (row.requires_grad()) {
      Matrix& gr = tp.grad_buffer(row);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gr[j] += g(i, j);
    }
  });
}

Var layer_norm(Var x, Var gain, Var shift, double eps) {
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  const std::size_t m = xv.rows(), d = xv.cols();
  if (d < 2) throw DimensionError("layer_norm: need at least 2 columns, got " + xv.shape_str());
  require_shape(gain.value().rows() == 1 && gain.value().cols() == d, "layer_norm(gain)", xv,
                gain.value());
  require_shape(shift.value().rows() == 1 && shift.value().cols() == d, "layer_norm(shift)", xv,
                shift.value());
  Matrix xhat(m, d);
  std::vector<double> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = xv.row(i);
    double mu = 0.0;
    for (double v : r) mu += v;
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (double v : r) var += (v - mu) * (v - mu);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) xhat(i, j) = (r[j] - mu) * inv_std[i];
  }
  const Matrix& gv = gain.value();
  const Matrix& sv = shift.value();
  Matrix out(m, d);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) out(i, j) = gv[j] * xhat(i, j) + sv[j];

  return t.record(std::move(out), {x, gain, shift},
                  [x, gain, shift, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                      Tape& tp, const Matrix& g) {
                    const std::size_t m = g.rows(), d = g.cols();
                    if (gain.requires_grad()) {
                      Matrix& gg = tp.grad_buffer(gain);
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < d; ++j) gg[j] += g(i, j) * xhat(i, j);
                    }
                    if (shift.requires_grad()) {
                      Matrix& gs = tp.grad_buffer(shift);
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < d; ++j) gs[j] += g(i, j);
                    }
                    if (!x.requires_grad()) return;
                    const Matrix& gv = gain.value();
                    Matrix& gx = tp.grad_buffer(x);
                    std::vector<double> dxhat(d);
                    for (std::size_t i = 0; i < m; ++i) {
                      double mean_d = 0.0, mean_dx = 0.0;
                      for (std::size_t j = 0; j < d; ++j) {
                        dxhat[j] = g(i, j) * gv[j];
                        mean_d += dxhat[j];
                        mean_dx += dxhat[j] * xhat(i, j);
                      }
                      mean_d /= static_cast<double>(d);
                      mean_dx /= static_cast<double>(d);
                      for (std::size_t j = 0; j < d; ++j)
                        gx(i, j) += inv_std[i] * (dxhat[j] - mean_d - xhat(i, j) * mean_dx);
                    }
                  });
}

Var softmax_rows(Var x, const std::vector<bool>* mask) {
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  if (mask != nullptr && mask->size() != xv.size()) {
    throw DimensionError("softmax_rows: mask has " + std::to_string(mask->size()) +
                         " entries for input " + xv.shape_str());
  }
  Matrix p(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    const std::size_t base = i * xv.cols();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < xv.cols(); ++j) {
      if (mask == nullptr || (*mask)[base + j]) mx = std::max(mx, xv(i, j));
    }
    if (!std::isfinite(mx)) throw NumericError("softmax_rows: row " + std::to_string(i) +
                                               " has no finite unmasked entry");
    double z = 0.0;
    for (std::size_t j = 0; j < xv.cols(); ++j) {
      if (mask == nullptr || (*mask)[base + j]) {
        p(i, j) = std::exp(xv(i, j) - mx);
        z += p(i, j);
      }
    }
    for (std::size_t j = 0; j < xv.cols(); ++j) p(i, j) /= z;
  }
  Matrix out = p;
  return t.record(std::move(out), {x}, [x, p = std::move(p)](Tape& tp, const Matrix& g) {
    Matrix& gx = tp.grad_buffer(x);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * p(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) gx(i, j) += p(i, j) * (g(i, j) - dot);
    }
  });
}

Var gelu(Var x) {
  Tape& t = tape_of(x);
  Matrix out = map(x.value(), [](double v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  });
  return t.record(std::move(out), {x}, [x](Tape& tp, const Matrix& g) {
    const Matrix& xv = x.value();
    Matrix& gx = tp.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = xv[i];
      const double th = std::tanh(kGeluC * (v + kGeluA * v * v * v));
      const double dudv = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      gx[i] += g[i] * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * dudv);
    }
  });
}

Var sigmoid(Var x) {
  Tape& t = tape_of(x);
  Matrix out = map(x.value(), [](double v) { return sigmoid(v); });
  Matrix s = out;
  return t.record(std::move(out), {x}, [x, s = std::move(s)](Tape& tp, const Matrix& g) {
    Matrix& gx = tp.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * s[i] * (1.0 - s[i]);
  });
}

Var softplus(Var x) {
  Tape& t = tape_of(x);
  Matrix out = map(x.value(), [](double v) { return softplus(v); });
  return t.record(std::move(out), {x}, [x](Tape& tp, const Matrix& g) {
    const Matrix& xv = x.value();
    Matrix& gx = tp.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * sigmoid(xv[i]);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  Tape& t = tape_of(parts[0]);
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    require_shape(p.cols() == cols, "concat_rows", parts[0].value(), p.value());
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const auto src = p.value().data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += src.size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), inputs, [inputs](Tape& tp, const Matrix& g) {
    std::size_t row = 0;
    for (const Var& p : inputs) {
      const std::size_t r = p.rows();
      if (p.requires_grad()) {
        Matrix& gp = tp.grad_buffer(p);
        const std::size_t n = r * g.cols();
        const double* src = g.data().data() + row * g.cols();
        for (std::size_t i = 0; i < n; ++i) gp[i] += src[i];
      }
      row += r;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  Tape& t = tape_of(parts[0]);
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    require_shape(p.rows() == rows, "concat_cols", parts[0].value(), p.value());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Matrix& pv = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < pv.cols(); ++j) out(i, offset + j) = pv(i, j);
    offset += pv.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), inputs, [inputs](Tape& tp, const Matrix& g) {
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      const std::size_t c = p.cols();
      if (p.requires_grad()) {
        Matrix& gp = tp.grad_buffer(p);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < c; ++j) gp(i, j) += g(i, offset + j);
      }
      offset += c;
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (begin + count > av.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of range for " + av.shape_str());
  }
  Matrix out(count, av.cols());
  const auto src = av.data().subspan(begin * av.cols(), count * av.cols());
  std::copy(src.begin(), src.end(), out.data().begin());
  return t.record(std::move(out), {a}, [a, begin](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    double* dst = ga.data().data() + begin * ga.cols();
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (begin + count > av.cols()) {
    throw DimensionError("slice_cols: cols [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of range for " + av.shape_str());
  }
  Matrix out(av.rows(), count);
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = av(i, begin + j);
  return t.record(std::move(out), {a}, [a, begin](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) ga(i, begin + j) += g(i, j);
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double acc = 0.0;
  for (double v : a.value().data()) acc += v;
  return t.record(Matrix(1, 1, acc), {a}, [a](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean: empty input");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var fuse_tokens(Var z_fc, Var z_hsi, Var alpha) {
  Tape& t = tape_of(z_fc);
  const Matrix& fv = z_fc.value();
  const Matrix& hv = z_hsi.value();
  const Matrix& av = alpha.value();
  require_shape(fv.same_shape(hv), "fuse_tokens(z_fc, z_hsi)", fv, hv);
  require_shape(av.rows() == fv.rows() && av.cols() == 1, "fuse_tokens(alpha)", fv, av);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    if (!(av[i] >= 0.0 && av[i] <= 1.0)) {
      throw DomainError("fuse_tokens: alpha[" + std::to_string(i) + "] = " +
                        std::to_string(av[i]) + " outside [0, 1]");
    }
  }
  Matrix out(fv.rows(), fv.cols());
  for (std::size_t i = 0; i < fv.rows(); ++i) {
    const double a = av[i];
    const double b = 1.0 - a;
    for (std::size_t j = 0; j < fv.cols(); ++j) {
      const double f = fv(i, j), h = hv(i, j);
      out(i, j) = f == h ? f : a * f + b * h;
    }
  }
  return t.record(std::move(out), {z_fc, z_hsi, alpha},
                  [z_fc, z_hsi, alpha](Tape& tp, const Matrix& g) {
                    const Matrix& fv = z_fc.value();
                    const Matrix& hv = z_hsi.value();
                    const Matrix& av = alpha.value();
                    if (z_fc.requires_grad()) {
                      Matrix& gf = tp.grad_buffer(z_fc);
                      for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) gf(i, j) += av[i] * g(i, j);
                    }
                    if (z_hsi.requires_grad()) {
                      Matrix& gh = tp.grad_buffer(z_hsi);
                      for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j)
                          gh(i, j) += (1.0 - av[i]) * g(i, j);
                    }
                    if (alpha.requires_grad()) {
                      Matrix& ga = tp.grad_buffer(alpha);
                      for (std::size_t i = 0; i < g.rows(); ++i) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < g.cols(); ++j)
                          acc += g(i, j) * (fv(i, j) - hv(i, j));
                        ga[i] += acc;
                      }
                    }
                  });
}

Var bce_with_logits(Var logits, const Matrix& targets) {
  Matrix w(targets.rows(), targets.cols());
  w.fill(1.0);
  return bce_with_logits(logits, targets, w);
}

Var bce_with_logits(Var logits, const Matrix& targets, const Matrix& weights) {
  Tape& t = tape_of(logits);
  const Matrix& lv = logits.value();
  require_shape(lv.same_shape(targets), "bce_with_logits", lv, targets);
  require_shape(lv.same_shape(weights), "bce_with_logits", lv, weights);
  if (lv.size() == 0) throw DimensionError("bce_with_logits: empty input");
  double acc = 0.0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (weights[i] < 0.0) throw DomainError("bce_with_logits: negative weight");
    const double x = lv[i];
    acc += weights[i] * (std::max(x, 0.0) - x * targets[i] + std::log1p(std::exp(-std::abs(x))));
    wsum += weights[i];
  }
  if (!(wsum > 0.0)) throw DomainError("bce_with_logits: weights sum to zero");
  return t.record(Matrix(1, 1, acc / wsum), {logits},
                  [logits, targets, weights, wsum](Tape& tp, const Matrix& g) {
                    const Matrix& lv = logits.value();
                    Matrix& gl = tp.grad_buffer(logits);
                    for (std::size_t i = 0; i < lv.size(); ++i)
                      gl[i] += g[0] * weights[i] * (sigmoid(lv[i]) - targets[i]) / wsum;
                  });
}

Var iou_loss(Var pred, const Matrix& target) {
  Tape& t = tape_of(pred);
  const Matrix& p = pred.value();
  if (p.rows() != 1 || p.cols() != 4) throw DimensionError("iou_loss: pred must be 1x4, got " + p.shape_str());
  require_shape(target.same_shape(p), "iou_loss", p, target);
  const double ix1 = std::max(p[0], target[0]);
  const double iy1 = std::max(p[1], target[1]);
  const double ix2 = std::min(p[2], target[2]);
  const double iy2 = std::min(p[3], target[3]);
  const double iw = std::max(0.0, ix2 - ix1);
  const double ih = std::max(0.0, iy2 - iy1);
  const double inter = iw * ih;
  const double pw = p[2] - p[0], ph = p[3] - p[1];
  const double area_p = std::max(0.0, pw) * std::max(0.0, ph);
  const double area_t =
      std::max(0.0, target[2] - target[0]) * std::max(0.0, target[3] - target[1]);
  const double uni = area_p + area_t - inter;
  const double iou = uni > 0.0 ? inter / uni : 0.0;
  return t.record(Matrix(1, 1, 1.0 - iou), {pred},
                  [pred, target, iw, ih, inter, uni, pw, ph](Tape& tp, const Matrix& g) {
                    if (!(uni > 0.0)) return;
                    const Matrix& p = pred.value();
                    // loss = 1 - I/U with U = Ap + At - I
                    const double d_inter = -(uni + inter) / (uni * uni);
                    const double d_area = inter / (uni * uni);
                    double gi[4] = {0.0, 0.0, 0.0, 0.0};
                    if (iw > 0.0 && ih > 0.0) {
                      if (p[0] > target[0]) gi[0] = -ih;
                      if (p[2] < target[2]) gi[2] = ih;
                      if (p[1] > target[1]) gi[1] = -iw;
                      if (p[3] < target[3]) gi[3] = iw;
                    }
                    double ga[4] = {0.0, 0.0, 0.0, 0.0};
                    if (pw > 0.0 && ph > 0.0) {
                      ga[0] = -ph;
                      ga[2] = ph;
                      ga[1] = -pw;
                      ga[3] = pw;
                    }
                    Matrix& gp = tp.grad_buffer(pred);
                    for (int k = 0; k < 4; ++k) gp[k] += g[0] * (d_inter * gi[k] + d_area * ga[k]);
                  });
}

Var l1_loss(Var pred, const Matrix& target) {
  Tape& t = tape_of(pred);
  const Matrix& p = pred.value();
  require_shape(p.same_shape(target), "l1_loss", p, target);
  if (p.size() == 0) throw DimensionError("l1_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - target[i]);
  const double n = static_cast<double>(p.size());
  return t.record(Matrix(1, 1, acc / n), {pred}, [pred, target, n](Tape& tp, const Matrix& g) {
    const Matrix& p = pred.value();
    Matrix& gp = tp.grad_buffer(pred);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double diff = p[i] - target[i];
      const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      gp[i] += g[0] * sgn / n;
    }
  });
}

}  // namespace spectrack
