#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spectrack/params.hpp"

namespace spectrack {

/// STCK1 container: the 5 magic bytes "STCK1", a little-endian u32 byte
/// length, a UTF-8 JSON manifest
///   {"blocks": [{"name", "rows", "cols", "byte_offset"}...], "meta": {...}}
/// and then every block as little-endian f64, row-major. `byte_offset` is
/// counted from the first payload byte.
struct Checkpoint {
  ParamSet params;
  nlohmann::json meta = nlohmann::json::object();
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Little-endian helpers shared with the sequence format.
namespace le {
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f64(std::vector<std::uint8_t>& out, double v);
void put_f32(std::vector<std::uint8_t>& out, float v);
std::uint32_t get_u32(const std::uint8_t* p);
double get_f64(const std::uint8_t* p);
float get_f32(const std::uint8_t* p);
}  // namespace le

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace spectrack
