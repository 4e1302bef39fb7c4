#pragma once

#include <filesystem>

#include "asgm/field.hpp"

namespace asgm {

/// Read a binary 8-bit PGM (P5, one channel) or PPM (P6, three channels).
/// Bytes map affinely: 0 -> -1.0, 255 -> +1.0.
Field read_image(const std::filesystem::path& path);

/// Write a PGM (1 channel) or PPM (3 channels). Values are clamped to
/// [-1, 1] and mapped back to bytes; the round trip is byte-exact on
/// in-range data.
void write_image(const Field& field, const std::filesystem::path& path);

}  // namespace asgm
