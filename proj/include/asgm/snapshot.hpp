#pragma once

#include <filesystem>

#include "asgm/field.hpp"

namespace asgm {

/// Binary tensor format: magic "ASGM0001" (8 bytes), then four little-endian
/// u32 (channels, height, width, dtype = 0 for f32), then the payload as
/// little-endian 32-bit floats in channel-major, row-major order.
void save_snapshot(const Field& field, const std::filesystem::path& path);

/// Inverse of save_snapshot. Throws FormatError on magic mismatch or a
/// truncated payload.
Field load_snapshot(const std::filesystem::path& path);

}  // namespace asgm
