#pragma once

namespace spectrack {

/// Axis-aligned box in pixels: top-left corner plus size.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const noexcept { return x + w / 2.0; }
  double cy() const noexcept { return y + h / 2.0; }
  double right() const noexcept { return x + w; }
  double bottom() const noexcept { return y + h; }

  static Box from_center(double cx, double cy, double w, double h) noexcept {
    return {cx - w / 2.0, cy - h / 2.0, w, h};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace spectrack
