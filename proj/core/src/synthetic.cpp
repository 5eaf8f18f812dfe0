#include "spectrack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spectrack/error.hpp"

namespace spectrack {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Subtracts the projection of v onto each orthonormal basis vector.
void project_out(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (const auto& q : basis) {
    const double c = dot(v, q);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
  }
}

bool push_orthonormal(std::vector<std::vector<double>>& basis, std::vector<double> v) {
  project_out(v, basis);
  project_out(v, basis);
  const double n = std::sqrt(dot(v, v));
  if (n < 1e-9) return false;
  for (double& x : v) x /= n;
  basis.push_back(std::move(v));
  return true;
}

std::vector<double> checked_signature(const std::vector<double>& given,
                                      std::vector<double> (*fallback)(std::size_t),
                                      std::size_t bands, const char* what) {
  if (given.empty()) return fallback(bands);
  if (given.size() != bands) {
    throw ConfigError(std::string(what) + " signature has " + std::to_string(given.size()) +
                      " values for " + std::to_string(bands) + " bands");
  }
  for (double v : given) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError(std::string(what) + " signature values must lie in [0, 1]");
    }
  }
  return given;
}

Box clamp_box(double cx, double cy, double size, const SceneSpec& spec) {
  const double half = size / 2.0;
  cx = std::clamp(cx, half, static_cast<double>(spec.width) - half);
  cy = std::clamp(cy, half, static_cast<double>(spec.height) - half);
  return Box::from_center(cx, cy, size, size);
}

}  // namespace

Matrix false_color_filter(std::size_t bands) {
  if (bands == 0) throw DomainError("false_color_filter: zero bands");
  Matrix f(3, bands);
  const double n = static_cast<double>(bands);
  const double width = std::max(n / 6.0, 0.75);
  const double centers[3] = {n / 6.0, n / 2.0, 5.0 * n / 6.0};
  for (std::size_t c = 0; c < 3; ++c) {
    double total = 0.0;
    for (std::size_t b = 0; b < bands; ++b) {
      const double z = (static_cast<double>(b) + 0.5 - centers[c]) / width;
      f(c, b) = std::exp(-0.5 * z * z);
      total += f(c, b);
    }
    for (std::size_t b = 0; b < bands; ++b) f(c, b) /= total;
  }
  return f;
}

std::vector<double> default_target_signature(std::size_t bands) {
  std::vector<double> s(bands);
  for (std::size_t b = 0; b < bands; ++b) {
    const double t = static_cast<double>(b) / static_cast<double>(std::max<std::size_t>(bands - 1, 1));
    s[b] = 0.5 + 0.15 * std::sin(2.0 * std::numbers::pi * 1.3 * t + 0.4);
  }
  return s;
}

std::vector<double> default_background_signature(std::size_t bands) {
  std::vector<double> s(bands);
  for (std::size_t b = 0; b < bands; ++b) {
    const double t = static_cast<double>(b) / static_cast<double>(std::max<std::size_t>(bands - 1, 1));
    s[b] = 0.18 + 0.06 * std::cos(2.0 * std::numbers::pi * 0.7 * t);
  }
  return s;
}

std::vector<double> default_distractor_signature(std::size_t bands) {
  std::vector<double> s(bands);
  for (std::size_t b = 0; b < bands; ++b) {
    const double t = static_cast<double>(b) / static_cast<double>(std::max<std::size_t>(bands - 1, 1));
    s[b] = 0.55 + 0.2 * std::cos(2.0 * std::numbers::pi * 0.9 * t);
  }
  return s;
}

std::vector<double> ambiguous_signature(const Matrix& filter, std::span<const double> target) {
  const std::size_t bands = filter.cols();
  if (target.size() != bands) {
    throw DimensionError("ambiguous_signature: target has " + std::to_string(target.size()) +
                         " bands, filter has " + std::to_string(bands));
  }
  if (bands <= 3) {
    throw DomainError("ambiguity mode needs more than 3 bands: the false-colour filter has a "
                      "trivial null space for B = " + std::to_string(bands));
  }
  std::vector<std::vector<double>> row_space;
  for (std::size_t c = 0; c < 3; ++c) {
    auto r = filter.row(c);
    if (!push_orthonormal(row_space, std::vector<double>(r.begin(), r.end()))) {
      throw DomainError("ambiguous_signature: false-colour filter is rank deficient");
    }
  }
  auto constraints = row_space;
  // Prefer a direction orthogonal to the target too, so the spectral angle is large.
  if (bands > 4) push_orthonormal(constraints, std::vector<double>(target.begin(), target.end()));

  std::vector<double> n(bands);
  for (std::size_t b = 0; b < bands; ++b) n[b] = (b % 2 == 0) ? 1.0 : -1.0;
  project_out(n, constraints);
  project_out(n, constraints);
  if (std::sqrt(dot(n, n)) < 1e-6) {
    double best = 0.0;
    for (std::size_t k = 0; k < bands; ++k) {
      std::vector<double> e(bands, 0.0);
      e[k] = 1.0;
      project_out(e, constraints);
      project_out(e, constraints);
      if (const double norm = std::sqrt(dot(e, e)); norm > best) {
        best = norm;
        n = e;
      }
    }
  }
  // Re-project against the filter rows alone so F·n vanishes to rounding.
  project_out(n, row_space);
  double peak = 0.0;
  for (double v : n) peak = std::max(peak, std::abs(v));
  if (peak < 1e-12) throw DomainError("ambiguous_signature: empty null-space direction");
  for (double& v : n) v /= peak;

  double c = 0.3;
  for (std::size_t b = 0; b < bands; ++b) {
    if (n[b] > 0.0) c = std::min(c, (1.0 - target[b]) / n[b]);
    if (n[b] < 0.0) c = std::min(c, target[b] / -n[b]);
  }
  std::vector<double> out(bands);
  for (std::size_t b = 0; b < bands; ++b) out[b] = std::clamp(target[b] + c * n[b], 0.0, 1.0);
  return out;
}

double spectral_angle_deg(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("spectral_angle_deg: length mismatch");
  const double denom = std::sqrt(dot(a, a) * dot(b, b));
  if (denom == 0.0) return 0.0;
  return std::acos(std::clamp(dot(a, b) / denom, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

SceneLayout scene_layout(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.height < spec.object_size || spec.width < spec.object_size) {
    throw ConfigError("scene: object larger than the frame");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const double w = static_cast<double>(spec.width), h = static_cast<double>(spec.height);
  const double margin = spec.object_size / 2.0 + spec.distractor_amplitude * 0.5;
  const double m0x = margin + unit(rng) * std::max(w - 2 * margin, 0.0);
  const double m0y = margin + unit(rng) * std::max(h - 2 * margin, 0.0);
  const double heading = two_pi * unit(rng);
  const double speed = spec.max_speed * unit(rng);
  const double ax = spec.amplitude * unit(rng), ay = spec.amplitude * unit(rng);
  const double px = two_pi * unit(rng), py = two_pi * unit(rng);
  const double axis = two_pi * unit(rng);
  const double phase = two_pi * unit(rng);

  SceneLayout layout;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double tt = static_cast<double>(t);
    double mx = m0x + speed * std::cos(heading) * tt + ax * std::sin(two_pi * tt / spec.period + px);
    double my = m0y + speed * std::sin(heading) * tt + ay * std::sin(two_pi * tt / spec.period + py);
    // Reflect the drifting midpoint back into the frame.
    auto reflect = [](double v, double lo, double hi) {
      if (hi <= lo) return (lo + hi) / 2.0;
      const double span = hi - lo;
      double r = std::fmod(v - lo, 2.0 * span);
      if (r < 0) r += 2.0 * span;
      return lo + (r <= span ? r : 2.0 * span - r);
    };
    mx = reflect(mx, margin, w - margin);
    my = reflect(my, margin, h - margin);
    if (!spec.distractor) {
      layout.target.push_back(clamp_box(mx, my, spec.object_size, spec));
      continue;
    }
    const double osc = spec.distractor_amplitude * std::cos(two_pi * tt / spec.distractor_period + phase);
    const double ox = osc * std::cos(axis), oy = osc * std::sin(axis);
    layout.target.push_back(clamp_box(mx + ox, my + oy, spec.object_size, spec));
    layout.distractor.push_back(clamp_box(mx - ox, my - oy, spec.object_size, spec));
  }
  return layout;
}

SequenceRecord generate_synthetic_sequence(const SceneSpec& spec, std::uint64_t seed) {
  const std::size_t bands = spec.modality.bands;
  if (bands == 0) throw ConfigError("scene: modality must have at least one band");
  if (spec.frames == 0) throw ConfigError("scene: zero frames");
  if (spec.noise_sigma < 0.0) throw ConfigError("scene: negative noise sigma");

  const Matrix filter = false_color_filter(bands);
  const auto target = checked_signature(spec.target_signature, default_target_signature, bands, "target");
  const auto background = checked_signature(spec.background_signature, default_background_signature,
                                            bands, "background");
  std::vector<double> distractor;
  if (spec.distractor) {
    distractor = spec.ambiguity ? ambiguous_signature(filter, target)
                                : checked_signature(spec.distractor_signature,
                                                    default_distractor_signature, bands,
                                                    "distractor");
  }

  const SceneLayout layout = scene_layout(spec, seed);
  // Separate stream for pixel noise so layouts do not depend on frame size.
  std::mt19937_64 noise_rng(seed ^ 0xA5A5A5A5DEADBEEFull);
  std::normal_distribution<double> noise(0.0, 1.0);

  SequenceRecord rec;
  rec.name = spec.name;
  rec.modality = spec.modality;
  rec.seed = seed;
  std::vector<double> spectrum(bands);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    HsiCube cube(bands, spec.height, spec.width, spec.modality.name);
    HsiCube fc(3, spec.height, spec.width, spec.modality.name);
    auto covers = [](const Box& b, double px, double py) {
      return px >= b.x && px < b.right() && py >= b.y && py < b.bottom();
    };
    for (std::size_t y = 0; y < spec.height; ++y) {
      for (std::size_t x = 0; x < spec.width; ++x) {
        const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
        const std::vector<double>* sig = &background;
        if (covers(layout.target[t], px, py)) {
          sig = &target;
        } else if (spec.distractor && covers(layout.distractor[t], px, py)) {
          sig = &distractor;
        }
        for (std::size_t b = 0; b < bands; ++b) {
          spectrum[b] = (*sig)[b] + (spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(noise_rng) : 0.0);
          cube.at(b, y, x) = static_cast<float>(spectrum[b]);
        }
        for (std::size_t c = 0; c < 3; ++c) {
          double v = 0.0;
          for (std::size_t b = 0; b < bands; ++b) v += filter(c, b) * spectrum[b];
          fc.at(c, y, x) = static_cast<float>(v);
        }
      }
    }
    rec.frames.push_back(std::move(cube));
    rec.false_color.push_back(std::move(fc));
    rec.gt_boxes.push_back(layout.target[t]);
  }
  rec.validate();
  return rec;
}

}  // namespace spectrack
