#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace workbench {

// FNV-1a, 64 bit. Stable across platforms; used for every content hash we persist.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0);

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

std::string to_hex(std::uint64_t value);

// Rankings treat similarities that agree to 12 decimal places as tied, so a
// cosine reached along two rounding paths still falls back to the name order.
std::int64_t similarity_rank_key(double score);

// Small deterministic generator. The standard distributions are
// implementation-defined, so seeded outputs we promise to reproduce go through this.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform();
  double normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
bool istarts_with(std::string_view s, std::string_view prefix);
// Newlines and carriage returns become single spaces.
std::string collapse_newlines(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
// Writes to a sibling temp file then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> contents);

}  // namespace workbench
