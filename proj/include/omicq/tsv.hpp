#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace omicq {

using Rng = std::mt19937_64;

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Strict full-string parse; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);

std::vector<std::string> split_tabs(std::string_view line);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// FNV-1a 64-bit, used for manifest content hashes and derived seeds.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 14695981039346656037ULL);
std::string hex64(std::uint64_t v);

// splitmix64 finaliser; derive_seed mixes a base seed with a label so that
// per-item generators do not depend on iteration order.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace omicq
