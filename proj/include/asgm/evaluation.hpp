#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "asgm/field.hpp"

namespace asgm {

/// Sample statistics standing in for learned-feature metrics at desk scale.
struct MomentReport {
    Field mean;
    std::vector<double> covariance_spectrum;        // top-k eigenvalues, descending
    std::vector<std::vector<double>> histograms;    // per channel, 64 bins on [-1, 1]
};

/// Unbiased mean, covariance spectrum (dense eigendecomposition up to 4096
/// dimensions, block power iteration above), and per-channel histograms
/// whose masses each sum to one.
MomentReport moments(const std::vector<Field>& samples, int top_k = 64);

/// Unbiased MMD^2 estimate with an RBF kernel, exp(-d^2 / m) where m is the
/// median pairwise squared distance over the pooled samples; clamped at 0.
/// Kernel sums are accumulated in sorted order, so the estimate is exactly
/// invariant under sample reordering.
double mmd_rbf(const std::vector<Field>& a, const std::vector<Field>& b);

struct MmdTestResult {
    double mmd = 0.0;          // observed MMD^2 (clamped at 0)
    double null_q95 = 0.0;     // 95th percentile of the permutation null
    std::vector<double> null_values;
};

/// Two-sample permutation test: the kernel (and bandwidth) is fixed from
/// the original pooling, group labels are permuted `permutations` times.
MmdTestResult mmd_permutation_test(const std::vector<Field>& a, const std::vector<Field>& b,
                                   int permutations, std::uint64_t seed);

/// Pearson correlation of central-difference gradient-magnitude maps,
/// averaged over channels. Throws DegenerateVarianceError when a gradient
/// map is constant (in particular when both fields are constant).
double edge_correlation(const Field& a, const Field& b);

/// Tile grid written as one PGM/PPM with 1-pixel white separators, plus a
/// plain-text index of per-row labels. Tiles must share a shape.
void montage(const std::vector<Field>& tiles, int columns, const std::filesystem::path& image_path,
             const std::vector<std::string>& row_labels,
             const std::filesystem::path& index_path);

}  // namespace asgm
