#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spectrack/box.hpp"

namespace spectrack {

/// Intersection over union; 0 when the union is empty.
double iou(const Box& a, const Box& b) noexcept;
/// Euclidean distance between box centres, in pixels.
double center_error(const Box& a, const Box& b) noexcept;

struct MetricCurve {
  std::string name;
  std::vector<double> thresholds;
  std::vector<double> values;
  double summary = 0.0;
};

/// Success plot over 51 thresholds 0, 0.02, ..., 1: fraction of frames with
/// IoU ≥ t. Summary is the mean over thresholds (the AUC).
MetricCurve success_auc(std::span<const double> ious);

/// Fraction of frames whose centre error is ≤ tau pixels.
double dp_at(std::span<const double> errors, double tau = 20.0);

/// Precision plot over integer thresholds 0..max_px; summary is dp_at(tau).
MetricCurve precision_curve(std::span<const double> errors, double tau = 20.0, int max_px = 50);

/// Writes `<path>.csv` (curve,threshold,value) and `<path>.svg`. The x axis
/// spans [0, 1] unless some threshold exceeds 1, then [0, 50].
void emit_plot(std::span<const MetricCurve> curves, const std::filesystem::path& path,
               const std::string& title = "");

/// Parses the CSV written by emit_plot (summaries are not stored there).
std::vector<MetricCurve> read_curves_csv(const std::filesystem::path& path);

/// Per-sequence tracker output: {"sequence", "modality", "boxes": [[x, y, w, h], ...]}.
struct TrackingResult {
  std::string sequence;
  std::string modality;
  std::vector<Box> boxes;
};

nlohmann::json to_json(const TrackingResult& result);
TrackingResult result_from_json(const nlohmann::json& j);
void save_result(const TrackingResult& result, const std::filesystem::path& path);
TrackingResult load_result(const std::filesystem::path& path);

struct SequenceScore {
  std::string sequence;
  std::string modality;
  std::vector<double> ious;
  std::vector<double> center_errors;
  double auc = 0.0;
  double dp20 = 0.0;
  double mean_iou = 0.0;
};

/// Scores predicted boxes against ground truth frame by frame.
SequenceScore score_sequence(const TrackingResult& result, std::span<const Box> ground_truth);

}  // namespace spectrack
