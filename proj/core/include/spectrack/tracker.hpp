#pragma once

#include <cstddef>
#include <utility>

#include "spectrack/metrics.hpp"
#include "spectrack/model.hpp"
#include "spectrack/sequence.hpp"

namespace spectrack {

/// Square region of a frame, in frame pixels.
struct CropWindow {
  double cx = 0.0;
  double cy = 0.0;
  double side = 0.0;
};

inline constexpr double kTemplateFactor = 2.0;
inline constexpr double kSearchFactor = 4.0;

/// Template crop: centred on the box, side 2× its longer edge.
CropWindow template_window(const Box& box) noexcept;
/// Search crop: centred on the box, side 4× its longer edge.
CropWindow search_window(const Box& box) noexcept;

/// Crops both modalities with identical geometry and patches them.
CropInput make_crop(const HsiCube& hsi, const HsiCube& fc, const CropWindow& window,
                    std::size_t out_size, const ModelConfig& cfg);

/// Box corners relative to a crop, as fractions of the crop side.
std::array<double, 4> box_in_window(const Box& box, const CropWindow& window) noexcept;
/// Inverse of box_in_window for corners given in crop pixels of an out_size crop.
Box box_from_window(const std::array<double, 4>& corners_px, const CropWindow& window,
                    std::size_t out_size) noexcept;

struct TrackerState {
  TokenGrid template_tokens;
  Box prev_box;
  std::size_t frame_index = 0;
  bool lost = false;
};

struct SearchContext {
  CropWindow window;
  std::size_t frame_index = 0;
};

/// Source of head outputs for a search crop. The model is the usual one;
/// tests plug in oracles.
class SearchPredictor {
 public:
  virtual ~SearchPredictor() = default;
  virtual TokenGrid encode_template(const CropInput& templ) const = 0;
  virtual BoxPrediction predict(const TokenGrid& templ, const CropInput& search,
                                const SearchContext& ctx) const = 0;
};

class ModelPredictor final : public SearchPredictor {
 public:
  explicit ModelPredictor(const TrackModel& model) : model_(model) {}
  TokenGrid encode_template(const CropInput& templ) const override;
  BoxPrediction predict(const TokenGrid& templ, const CropInput& search,
                        const SearchContext& ctx) const override;

 private:
  const TrackModel& model_;
};

/// Separable Hann window, symmetric about the grid centre and strictly
/// positive at the border.
Matrix hanning_window(std::size_t grid_h, std::size_t grid_w);

/// Argmax of cls ⊙ window; ties go to the lowest row-major index.
std::size_t select_cell(const Matrix& cls, const Matrix& window);

struct TrackerOptions {
  /// Weight of the predicted size against the previous one; 1 follows the
  /// head exactly, 0 freezes the initial size.
  double scale_rate = 0.3;
};

/// Siamese tracking loop without template update.
class Tracker {
 public:
  Tracker(const SearchPredictor& predictor, ModelConfig cfg, TrackerOptions options = {});

  TrackerState init(const HsiCube& hsi, const HsiCube& fc, const Box& box) const;
  /// Searches around the previous box, decodes the best cell, blends its size
  /// with the previous one and clamps the
  /// result to the frame. A box left with no area inside the frame keeps the
  /// previous size at the clamped centre and sets `lost`.
  std::pair<TrackerState, Box> track_step(const TrackerState& state, const HsiCube& hsi,
                                          const HsiCube& fc) const;
  /// Frame 0 reports the ground truth, later frames the tracker output.
  TrackingResult track_sequence(const SequenceRecord& seq) const;

 private:
  const SearchPredictor& predictor_;
  ModelConfig cfg_;
  TrackerOptions options_;
  Matrix window_;
};

}  // namespace spectrack
