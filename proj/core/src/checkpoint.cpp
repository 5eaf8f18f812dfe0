#include "spectrack/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "spectrack/error.hpp"

namespace spectrack {

namespace le {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace le

namespace {
constexpr char kMagic[5] = {'S', 'T', 'C', 'K', '1'};
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json blocks = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& e : ckpt.params) {
    blocks.push_back({{"name", e.name},
                      {"rows", e.value.rows()},
                      {"cols", e.value.cols()},
                      {"byte_offset", offset}});
    offset += 8 * e.value.size();
  }
  nlohmann::json manifest = {{"blocks", blocks}, {"meta", ckpt.meta}};
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  le::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset);
  for (const auto& e : ckpt.params)
    for (double v : e.value.data()) le::put_f64(out, v);
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 9 || std::memcmp(bytes.data(), kMagic, 5) != 0) {
    throw ParseError("checkpoint: bad magic (expected STCK1)");
  }
  const std::uint32_t len = le::get_u32(bytes.data() + 5);
  if (bytes.size() < 9 + static_cast<std::size_t>(len)) {
    throw ParseError("checkpoint: truncated manifest");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.begin() + 9, bytes.begin() + 9 + len);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: manifest is not valid JSON: ") + e.what());
  }
  const std::size_t payload = 9 + len;
  Checkpoint ckpt;
  if (manifest.contains("meta")) ckpt.meta = manifest["meta"];
  std::uint64_t expected_offset = 0;
  try {
    for (const auto& b : manifest.at("blocks")) {
      const auto name = b.at("name").get<std::string>();
      const auto rows = b.at("rows").get<std::size_t>();
      const auto cols = b.at("cols").get<std::size_t>();
      const auto off = b.at("byte_offset").get<std::uint64_t>();
      if (off != expected_offset) {
        throw ParseError("checkpoint: block '" + name + "' has offset " + std::to_string(off) +
                         ", expected " + std::to_string(expected_offset));
      }
      const std::uint64_t nbytes = 8ull * rows * cols;
      if (payload + off + nbytes > bytes.size()) {
        throw ParseError("checkpoint: payload truncated inside block '" + name + "'");
      }
      Matrix m(rows, cols);
      const std::uint8_t* p = bytes.data() + payload + off;
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = le::get_f64(p + 8 * i);
      ckpt.params.add(name, std::move(m));
      expected_offset += nbytes;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: malformed block list: ") + e.what());
  }
  if (payload + expected_offset != bytes.size()) {
    throw ParseError("checkpoint: payload size mismatch (" +
                     std::to_string(bytes.size() - payload) + " bytes, manifest describes " +
                     std::to_string(expected_offset) + ")");
  }
  return ckpt;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace spectrack
