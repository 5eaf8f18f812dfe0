#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spectrack {

struct Modality {
  std::string name;
  std::size_t bands = 0;

  friend bool operator==(const Modality&, const Modality&) = default;
};

/// Unique-by-name set of modalities. The widest one fixes the common band
/// count every cube is zero-padded to.
class ModalityRegistry {
 public:
  ModalityRegistry() = default;
  explicit ModalityRegistry(std::vector<Modality> modalities);

  /// VIS:16, NIR:25, RedNIR:15.
  static ModalityRegistry hot2024();

  void add(Modality m);
  const Modality& find(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t max_bands() const noexcept;
  const std::vector<Modality>& modalities() const noexcept { return modalities_; }
  bool empty() const noexcept { return modalities_.empty(); }

 private:
  std::vector<Modality> modalities_;
};

/// Stack of `bands` planes of height×width samples, plane-major then
/// row-major, tagged with the modality that produced it.
class HsiCube {
 public:
  HsiCube() = default;
  HsiCube(std::size_t bands, std::size_t height, std::size_t width, std::string modality = {});
  HsiCube(std::size_t bands, std::size_t height, std::size_t width, std::vector<float> data,
          std::string modality = {});

  std::size_t bands() const noexcept { return bands_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  const std::string& modality() const noexcept { return modality_; }
  void set_modality(std::string m) { modality_ = std::move(m); }

  float& at(std::size_t b, std::size_t y, std::size_t x) noexcept {
    return data_[(b * height_ + y) * width_ + x];
  }
  float at(std::size_t b, std::size_t y, std::size_t x) const noexcept {
    return data_[(b * height_ + y) * width_ + x];
  }
  std::span<float> plane(std::size_t b) noexcept {
    return {data_.data() + b * height_ * width_, height_ * width_};
  }
  std::span<const float> plane(std::size_t b) const noexcept {
    return {data_.data() + b * height_ * width_, height_ * width_};
  }
  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  friend bool operator==(const HsiCube&, const HsiCube&) = default;

 private:
  std::size_t bands_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
  std::string modality_;
};

/// Copies bands 0..B-1 and appends zero planes up to `target_bands`.
HsiCube pad_bands(const HsiCube& cube, std::size_t target_bands);

/// Square crop of side `side` (frame pixels) centred at (cx, cy), resampled
/// bilinearly to out_size×out_size. Samples outside the frame take the
/// nearest edge value.
HsiCube crop_resample(const HsiCube& cube, double cx, double cy, double side,
                      std::size_t out_size);

}  // namespace spectrack
