// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vicl::util {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// 64-bit FNV-1a. Used where a stable, platform-independent hash is part of a
/// documented contract (mock backends, embeddings).
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Uniform integer in [0, n) by rejection sampling. Unlike
/// std::uniform_int_distribution the result is identical on every standard
/// library.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform_unit(std::mt19937_64& rng);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Replaces every character outside [A-Za-z0-9._-] by '_'.
std::string sanitize_component(std::string_view s);

}  // namespace vicl::util
