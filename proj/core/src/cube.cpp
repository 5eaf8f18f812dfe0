#include "spectrack/cube.hpp"

#include <algorithm>
#include <cmath>

#include "spectrack/error.hpp"

namespace spectrack {

ModalityRegistry::ModalityRegistry(std::vector<Modality> modalities) {
  for (auto& m : modalities) add(std::move(m));
}

ModalityRegistry ModalityRegistry::hot2024() {
  return ModalityRegistry({{"VIS", 16}, {"NIR", 25}, {"RedNIR", 15}});
}

void ModalityRegistry::add(Modality m) {
  if (m.bands == 0) throw ConfigError("modality '" + m.name + "' must have at least one band");
  if (contains(m.name)) throw ConfigError("duplicate modality '" + m.name + "'");
  modalities_.push_back(std::move(m));
}

const Modality& ModalityRegistry::find(const std::string& name) const {
  for (const auto& m : modalities_)
    if (m.name == name) return m;
  throw ConfigError("unknown modality '" + name + "'");
}

bool ModalityRegistry::contains(const std::string& name) const {
  return std::any_of(modalities_.begin(), modalities_.end(),
                     [&](const Modality& m) { return m.name == name; });
}

std::size_t ModalityRegistry::max_bands() const noexcept {
  std::size_t b = 0;
  for (const auto& m : modalities_) b = std::max(b, m.bands);
  return b;
}

HsiCube::HsiCube(std::size_t bands, std::size_t height, std::size_t width, std::string modality)
    : bands_(bands),
      height_(height),
      width_(width),
      data_(bands * height * width, 0.0f),
      modality_(std::move(modality)) {}

HsiCube::HsiCube(std::size_t bands, std::size_t height, std::size_t width, std::vector<float> data,
                 std::string modality)
    : bands_(bands),
      height_(height),
      width_(width),
      data_(std::move(data)),
      modality_(std::move(modality)) {
  if (data_.size() != bands * height * width) {
    throw DimensionError("cube data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(bands) + "x" + std::to_string(height) + "x" +
                         std::to_string(width));
  }
}

HsiCube pad_bands(const HsiCube& cube, std::size_t target_bands) {
  if (cube.bands() > target_bands) {
    throw DimensionError("pad_bands: cube has " + std::to_string(cube.bands()) +
                         " bands, more than the target " + std::to_string(target_bands));
  }
  HsiCube out(target_bands, cube.height(), cube.width(), cube.modality());
  std::copy(cube.data().begin(), cube.data().end(), out.data().begin());
  return out;
}

HsiCube crop_resample(const HsiCube& cube, double cx, double cy, double side,
                      std::size_t out_size) {
  if (cube.height() == 0 || cube.width() == 0) throw DimensionError("crop_resample: empty cube");
  if (!(side > 0.0) || out_size == 0) throw DomainError("crop_resample: non-positive crop size");
  HsiCube out(cube.bands(), out_size, out_size, cube.modality());
  const double step = side / static_cast<double>(out_size);
  const double x0 = cx - side / 2.0;
  const double y0 = cy - side / 2.0;
  const double max_x = static_cast<double>(cube.width() - 1);
  const double max_y = static_cast<double>(cube.height() - 1);

  struct Tap {
    std::size_t i0, i1;
    float w1;
  };
  auto taps = [&](double origin, double limit) {
    std::vector<Tap> t(out_size);
    for (std::size_t k = 0; k < out_size; ++k) {
      // Pixel centres sit at integer coordinates + 0.5.
      const double s = std::clamp(origin + (static_cast<double>(k) + 0.5) * step - 0.5, 0.0, limit);
      const auto i0 = static_cast<std::size_t>(std::floor(s));
      const std::size_t i1 = std::min(i0 + 1, static_cast<std::size_t>(limit));
      t[k] = {i0, i1, static_cast<float>(s - static_cast<double>(i0))};
    }
    return t;
  };
  const auto tx = taps(x0, max_x);
  const auto ty = taps(y0, max_y);

  for (std::size_t b = 0; b < cube.bands(); ++b) {
    for (std::size_t y = 0; y < out_size; ++y) {
      const Tap& ry = ty[y];
      for (std::size_t x = 0; x < out_size; ++x) {
        const Tap& rx = tx[x];
        const float top = cube.at(b, ry.i0, rx.i0) * (1.0f - rx.w1) + cube.at(b, ry.i0, rx.i1) * rx.w1;
        const float bot = cube.at(b, ry.i1, rx.i0) * (1.0f - rx.w1) + cube.at(b, ry.i1, rx.i1) * rx.w1;
        out.at(b, y, x) = top * (1.0f - ry.w1) + bot * ry.w1;
      }
    }
  }
  return out;
}

}  // namespace spectrack
