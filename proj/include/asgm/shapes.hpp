#pragma once

#include <cstdint>
#include <vector>

#include "asgm/field.hpp"

namespace asgm {

/// Seeded synthetic corpus: anti-aliased disks, rectangles and triangles on
/// flat backgrounds, intensities in [-1, 1].
std::vector<Field> make_shapes_corpus(int count, int channels, int height, int width,
                                      std::uint64_t seed);

/// Fixed structured test image: a checkerboard with a centered disk.
Field checkerboard_with_disk(int height, int width);

/// Stroke-style guide: k-means (Lloyd, seeded) on per-pixel color vectors,
/// each pixel replaced by its cluster centroid.
Field kmeans_stroke_guide(const Field& image, int k, int iterations, std::uint64_t seed);

}  // namespace asgm
