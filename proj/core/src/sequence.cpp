#include "spectrack/sequence.hpp"

#include <algorithm>
#include <cstring>

#include <nlohmann/json.hpp>

#include "spectrack/checkpoint.hpp"
#include "spectrack/error.hpp"

namespace spectrack {

namespace {
constexpr char kMagic[4] = {'H', 'S', 'Q', '1'};
constexpr std::size_t kHeaderSize = 4 + 5 * 4;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::filesystem::path sibling(const std::filesystem::path& path, const char* suffix) {
  auto out = path;
  out.replace_filename(path.stem().string() + suffix);
  return out;
}
}  // namespace

void SequenceRecord::validate() const {
  if (frames.empty()) throw DimensionError("sequence '" + name + "' has no frames");
  const auto& f0 = frames.front();
  if (gt_boxes.size() != frames.size()) {
    throw DimensionError("sequence '" + name + "': " + std::to_string(gt_boxes.size()) +
                         " boxes for " + std::to_string(frames.size()) + " frames");
  }
  if (false_color.size() != frames.size()) {
    throw DimensionError("sequence '" + name + "': " + std::to_string(false_color.size()) +
                         " false-colour frames for " + std::to_string(frames.size()) + " frames");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.bands() != f0.bands() || f.height() != f0.height() || f.width() != f0.width()) {
      throw DimensionError("sequence '" + name + "': frame " + std::to_string(i) +
                           " shape differs from frame 0");
    }
    const auto& fc = false_color[i];
    if (fc.bands() != 3 || fc.height() != f0.height() || fc.width() != f0.width()) {
      throw DimensionError("sequence '" + name + "': false-colour frame " + std::to_string(i) +
                           " must be 3x" + std::to_string(f0.height()) + "x" +
                           std::to_string(f0.width()));
    }
    const Box& b = gt_boxes[i];
    if (b.w < 0 || b.h < 0 || b.x < 0 || b.y < 0 || b.right() > static_cast<double>(f0.width()) ||
        b.bottom() > static_cast<double>(f0.height())) {
      throw DomainError("sequence '" + name + "': box " + std::to_string(i) + " out of bounds");
    }
  }
  if (modality.bands != 0 && modality.bands != f0.bands()) {
    throw DimensionError("sequence '" + name + "': modality " + modality.name + " declares " +
                         std::to_string(modality.bands) + " bands, frames have " +
                         std::to_string(f0.bands()));
  }
}

std::vector<std::uint8_t> encode_hcube(const std::vector<HsiCube>& frames,
                                       const std::string& modality) {
  const std::size_t b = frames.empty() ? 0 : frames[0].bands();
  const std::size_t h = frames.empty() ? 0 : frames[0].height();
  const std::size_t w = frames.empty() ? 0 : frames[0].width();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  le::put_u32(out, static_cast<std::uint32_t>(frames.size()));
  le::put_u32(out, static_cast<std::uint32_t>(h));
  le::put_u32(out, static_cast<std::uint32_t>(w));
  le::put_u32(out, static_cast<std::uint32_t>(b));
  le::put_u32(out, static_cast<std::uint32_t>(modality.size()));
  out.insert(out.end(), modality.begin(), modality.end());
  out.reserve(out.size() + frames.size() * b * h * w * 4);
  for (const auto& f : frames) {
    if (f.bands() != b || f.height() != h || f.width() != w) {
      throw DimensionError("encode_hcube: frames do not share one shape");
    }
    for (float v : f.data()) le::put_f32(out, v);
  }
  return out;
}

std::vector<HsiCube> decode_hcube(const std::vector<std::uint8_t>& bytes, std::string* modality) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("hcube: bad magic (expected HSQ1)");
  }
  if (bytes.size() < kHeaderSize) throw ParseError("hcube: truncated header");
  const std::uint32_t f = le::get_u32(bytes.data() + 4);
  const std::uint32_t h = le::get_u32(bytes.data() + 8);
  const std::uint32_t w = le::get_u32(bytes.data() + 12);
  const std::uint32_t b = le::get_u32(bytes.data() + 16);
  const std::uint32_t name_len = le::get_u32(bytes.data() + 20);
  if (bytes.size() < kHeaderSize + name_len) throw ParseError("hcube: truncated modality name");
  std::string name(bytes.begin() + kHeaderSize, bytes.begin() + kHeaderSize + name_len);
  const std::size_t payload = kHeaderSize + name_len;
  const std::uint64_t plane = static_cast<std::uint64_t>(b) * h * w;
  const std::uint64_t expected = plane * f * 4;
  if (bytes.size() - payload != expected) {
    throw ParseError("hcube: size mismatch, header describes " + std::to_string(f) + " frames (" +
                     std::to_string(expected) + " payload bytes) but payload has " +
                     std::to_string(bytes.size() - payload) + " bytes");
  }
  std::vector<HsiCube> frames;
  frames.reserve(f);
  const std::uint8_t* p = bytes.data() + payload;
  for (std::uint32_t i = 0; i < f; ++i) {
    std::vector<float> data(plane);
    for (std::size_t k = 0; k < plane; ++k, p += 4) data[k] = le::get_f32(p);
    frames.emplace_back(b, h, w, std::move(data), name);
  }
  if (modality != nullptr) *modality = std::move(name);
  return frames;
}

std::filesystem::path false_color_path(const std::filesystem::path& path) {
  return sibling(path, ".fc.hcube");
}

std::filesystem::path ground_truth_path(const std::filesystem::path& path) {
  return sibling(path, ".gt.json");
}

void save_sequence(const SequenceRecord& record, const std::filesystem::path& path) {
  record.validate();
  write_file(path, encode_hcube(record.frames, record.modality.name));
  write_file(false_color_path(path), encode_hcube(record.false_color, record.modality.name));
  nlohmann::json gt = nlohmann::json::array();
  for (const Box& b : record.gt_boxes) gt.push_back({b.x, b.y, b.w, b.h});
  const std::string text = gt.dump();
  write_file(ground_truth_path(path), std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<Box> load_ground_truth(const std::filesystem::path& gt_path) {
  const auto text = read_file(gt_path);
  std::vector<Box> boxes;
  try {
    const auto gt = nlohmann::json::parse(text.begin(), text.end());
    if (!gt.is_array()) throw ParseError("'" + gt_path.string() + "': expected an array of boxes");
    for (const auto& b : gt) {
      if (!b.is_array() || b.size() != 4) {
        throw ParseError("'" + gt_path.string() + "': ground truth entries must be [x, y, w, h]");
      }
      boxes.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + gt_path.string() + "': " + e.what());
  }
  return boxes;
}

SequenceRecord load_sequence(const std::filesystem::path& path) {
  SequenceRecord rec;
  rec.name = path.stem().string();
  std::string modality;
  rec.frames = decode_hcube(read_file(path), &modality);
  rec.false_color = decode_hcube(read_file(false_color_path(path)), nullptr);
  for (auto& fc : rec.false_color) fc.set_modality(modality);
  rec.modality = {modality, rec.frames.empty() ? 0 : rec.frames[0].bands()};

  rec.gt_boxes = load_ground_truth(ground_truth_path(path));
  if (rec.gt_boxes.size() != rec.frames.size()) {
    throw ParseError("'" + path.string() + "': size mismatch, " + std::to_string(rec.frames.size()) +
                     " frames but " + std::to_string(rec.gt_boxes.size()) + " ground-truth boxes");
  }
  rec.validate();
  return rec;
}

std::vector<std::filesystem::path> list_sequences(const std::filesystem::path& path) {
  if (!std::filesystem::is_directory(path)) {
    if (!std::filesystem::exists(path)) throw IoError("'" + path.string() + "' does not exist");
    return {path};
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(path)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && ends_with(name, ".hcube") && !ends_with(name, ".fc.hcube")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace spectrack
