#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spectrack/box.hpp"
#include "spectrack/cube.hpp"

namespace spectrack {

struct SequenceRecord {
  std::string name;
  std::vector<HsiCube> frames;
  std::vector<HsiCube> false_color;
  std::vector<Box> gt_boxes;
  Modality modality;
  std::optional<std::uint64_t> seed;

  std::size_t size() const noexcept { return frames.size(); }
  /// Throws unless frames share one shape, false-colour frames are 3-band
  /// with the same geometry and there is one in-bounds box per frame.
  void validate() const;
};

/// HCUBE: "HSQ1", u32 LE frames/height/width/bands/name-length, modality name,
/// then frames·bands·height·width little-endian f32 (frame, band, row, col).
std::vector<std::uint8_t> encode_hcube(const std::vector<HsiCube>& frames,
                                       const std::string& modality);
std::vector<HsiCube> decode_hcube(const std::vector<std::uint8_t>& bytes, std::string* modality);

/// Writes `<path>` (spectral frames), `<stem>.fc.hcube` (false colour, 3
/// bands) and `<stem>.gt.json` ([[x, y, w, h], ...]) next to it.
void save_sequence(const SequenceRecord& record, const std::filesystem::path& path);
SequenceRecord load_sequence(const std::filesystem::path& path);
std::vector<Box> load_ground_truth(const std::filesystem::path& gt_path);

std::filesystem::path false_color_path(const std::filesystem::path& path);
std::filesystem::path ground_truth_path(const std::filesystem::path& path);

/// `.hcube` files in a directory (skipping `.fc.hcube`), sorted by name; a
/// plain file path is returned as is.
std::vector<std::filesystem::path> list_sequences(const std::filesystem::path& path);

}  // namespace spectrack
