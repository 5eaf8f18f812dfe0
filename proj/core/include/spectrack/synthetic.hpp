#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spectrack/matrix.hpp"
#include "spectrack/sequence.hpp"

namespace spectrack {

/// Scene recipe for a synthetic snapshot-hyperspectral sequence: a target
/// rectangle and an optional distractor rectangle over a flat background.
///
/// The pair oscillates symmetrically about a midpoint that itself drifts on
/// a linear-plus-sinusoidal path, so the two objects cross each other every
/// half `distractor_period`. In ambiguity mode the distractor spectrum is
/// the target spectrum moved along the null space of the false-colour filter:
/// both objects look identical in false colour while their spectra differ.
struct SceneSpec {
  std::string name = "synthetic";
  std::size_t height = 128;
  std::size_t width = 128;
  std::size_t frames = 32;
  Modality modality{"VIS", 16};
  double noise_sigma = 0.01;
  double object_size = 16.0;
  /// Midpoint drift, pixels per frame (upper bound, direction random).
  double max_speed = 0.5;
  /// Midpoint sinusoid amplitude in pixels (upper bound) and period in frames.
  double amplitude = 6.0;
  double period = 24.0;
  bool distractor = true;
  bool ambiguity = true;
  /// Half the peak target-distractor separation, in pixels.
  double distractor_amplitude = 20.0;
  double distractor_period = 20.0;
  /// Empty vectors select built-in smooth curves.
  std::vector<double> target_signature;
  std::vector<double> distractor_signature;
  std::vector<double> background_signature;
};

/// Fixed 3×B false-colour filter: three Gaussian bumps centred at 1/6, 1/2
/// and 5/6 of the band axis, each row normalised to unit L1 norm.
Matrix false_color_filter(std::size_t bands);

std::vector<double> default_target_signature(std::size_t bands);
std::vector<double> default_background_signature(std::size_t bands);
std::vector<double> default_distractor_signature(std::size_t bands);

/// Signature equal to `target` under `filter` but spectrally distinct:
/// target + c·n for a unit-peak n in the null space of `filter` (orthogonal
/// to the target when the null space allows), c ≤ 0.3 keeping values in [0,1].
/// Throws DomainError when the filter has a trivial null space (B ≤ 3).
std::vector<double> ambiguous_signature(const Matrix& filter, std::span<const double> target);

/// Angle between two spectra in degrees.
double spectral_angle_deg(std::span<const double> a, std::span<const double> b);

/// Deterministic for a given (spec, seed).
SequenceRecord generate_synthetic_sequence(const SceneSpec& spec, std::uint64_t seed);

/// Target and distractor boxes per frame (distractor empty if disabled).
struct SceneLayout {
  std::vector<Box> target;
  std::vector<Box> distractor;
};
SceneLayout scene_layout(const SceneSpec& spec, std::uint64_t seed);

}  // namespace spectrack
