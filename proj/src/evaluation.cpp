#include "asgm/evaluation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "asgm/errors.hpp"
#include "asgm/image_io.hpp"
#include "asgm/rng.hpp"

namespace asgm {

namespace {

constexpr int kHistogramBins = 64;

void check_same_shapes(const std::vector<Field>& samples) {
    for (const Field& f : samples) {
        if (!f.same_shape(samples.front())) {
            throw ShapeMismatchError("samples must share one shape");
        }
    }
}

Eigen::MatrixXd stack_rows(const std::vector<Field>& samples) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto d = static_cast<Eigen::Index>(samples.front().size());
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto v = samples[static_cast<std::size_t>(i)].values();
        for (Eigen::Index k = 0; k < d; ++k) X(i, k) = v[static_cast<std::size_t>(k)];
    }
    return X;
}

// Exactly order-invariant sum: sort ascending, then accumulate.
double sorted_sum(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
}

std::vector<double> top_spectrum_dense(const Eigen::MatrixXd& centered, int top_k) {
    const auto n = centered.rows();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    std::vector<double> out;
    const auto d = cov.rows();
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(top_k, d); ++k) {
        out.push_back(es.eigenvalues()(d - 1 - k));
    }
    return out;
}

// Block power (subspace) iteration on the implicit covariance
// C v = X^T (X v) / (n-1), for dimensions too large to materialize C.
std::vector<double> top_spectrum_power(const Eigen::MatrixXd& centered, int top_k) {
    const auto n = centered.rows();
    const auto d = centered.cols();
    const int k = std::min<int>(top_k, static_cast<int>(std::min<Eigen::Index>(n, d)));
    RngStream rng(0x5eed, 0);
    Eigen::MatrixXd V(d, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) V(r, c) = rng.normal();
    }
    auto orthonormalize = [&](Eigen::MatrixXd& m) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
        m = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
    };
    orthonormalize(V);
    for (int it = 0; it < 300; ++it) {
        Eigen::MatrixXd W = centered.transpose() * (centered * V) / static_cast<double>(n - 1);
        V = W;
        orthonormalize(V);
    }
    Eigen::MatrixXd small =
        V.transpose() * (centered.transpose() * (centered * V)) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (small + small.transpose()));
    std::vector<double> out;
    for (int j = 0; j < k; ++j) out.push_back(es.eigenvalues()(k - 1 - j));
    return out;
}

}  // namespace

MomentReport moments(const std::vector<Field>& samples, int top_k) {
    if (samples.empty()) throw ConfigError("moments: empty sample set");
    check_same_shapes(samples);
    top_k = std::min(top_k, 64);

    MomentReport report;
    report.mean = Field::zeros_like(samples.front());
    for (const Field& f : samples) {
        auto mv = report.mean.values();
        auto fv = f.values();
        for (std::size_t k = 0; k < mv.size(); ++k) mv[k] += fv[k];
    }
    for (double& v : report.mean.values()) v /= static_cast<double>(samples.size());

    if (samples.size() >= 2) {
        Eigen::MatrixXd X = stack_rows(samples);
        Eigen::RowVectorXd mu = X.colwise().mean();
        Eigen::MatrixXd centered = X.rowwise() - mu;
        report.covariance_spectrum = X.cols() <= 4096 ? top_spectrum_dense(centered, top_k)
                                                      : top_spectrum_power(centered, top_k);
    }

    const int channels = samples.front().channels();
    report.histograms.assign(channels, std::vector<double>(kHistogramBins, 0.0));
    for (const Field& f : samples) {
        for (int c = 0; c < channels; ++c) {
            for (double v : f.channel(c)) {
                double u = (std::clamp(v, -1.0, 1.0) + 1.0) / 2.0;
                int bin = std::min(kHistogramBins - 1, static_cast<int>(u * kHistogramBins));
                report.histograms[c][bin] += 1.0;
            }
        }
    }
    double per_channel = static_cast<double>(samples.size()) *
                         static_cast<double>(samples.front().pixels_per_channel());
    for (auto& h : report.histograms) {
        for (double& v : h) v /= per_channel;
    }
    return report;
}

namespace {

struct KernelSums {
    double within_a = 0.0;
    double within_b = 0.0;
    double cross = 0.0;
};

double squared_distance(const Field& x, const Field& y) {
    double acc = 0.0;
    auto xv = x.values();
    auto yv = y.values();
    for (std::size_t k = 0; k < xv.size(); ++k) {
        double d = xv[k] - yv[k];
        acc += d * d;
    }
    return acc;
}

double median_pairwise_sq(const std::vector<const Field*>& pool) {
    std::vector<double> d2;
    d2.reserve(pool.size() * (pool.size() - 1) / 2);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            d2.push_back(squared_distance(*pool[i], *pool[j]));
        }
    }
    std::size_t mid = d2.size() / 2;
    std::nth_element(d2.begin(), d2.begin() + mid, d2.end());
    return d2[mid];
}

double unbiased_mmd_from_sums(const KernelSums& sums, std::size_t m, std::size_t n) {
    double est = sums.within_a / (static_cast<double>(m) * (m - 1)) +
                 sums.within_b / (static_cast<double>(n) * (n - 1)) -
                 2.0 * sums.cross / (static_cast<double>(m) * n);
    return std::max(est, 0.0);
}

}  // namespace

double mmd_rbf(const std::vector<Field>& a, const std::vector<Field>& b) {
    if (a.size() < 2 || b.size() < 2) {
        throw ConfigError("mmd_rbf needs at least two samples per set");
    }
    check_same_shapes(a);
    check_same_shapes(b);
    if (!a.front().same_shape(b.front())) throw ShapeMismatchError("sample sets differ in shape");

    std::vector<const Field*> pool;
    for (const Field& f : a) pool.push_back(&f);
    for (const Field& f : b) pool.push_back(&f);
    double m2 = median_pairwise_sq(pool);
    double gamma = m2 > 0.0 ? 1.0 / m2 : 0.0;

    auto kernel = [&](const Field& x, const Field& y) {
        return std::exp(-gamma * squared_distance(x, y));
    };
    std::vector<double> kaa, kbb, kab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) kaa.push_back(kernel(a[i], a[j]));
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        for (std::size_t j = i + 1; j < b.size(); ++j) kbb.push_back(kernel(b[i], b[j]));
    }
    for (const Field& x : a) {
        for (const Field& y : b) kab.push_back(kernel(x, y));
    }
    KernelSums sums;
    sums.within_a = 2.0 * sorted_sum(kaa);
    sums.within_b = 2.0 * sorted_sum(kbb);
    sums.cross = sorted_sum(kab);
    return unbiased_mmd_from_sums(sums, a.size(), b.size());
}

MmdTestResult mmd_permutation_test(const std::vector<Field>& a, const std::vector<Field>& b,
                                   int permutations, std::uint64_t seed) {
    if (a.size() < 2 || b.size() < 2) {
        throw ConfigError("mmd permutation test needs at least two samples per set");
    }
    check_same_shapes(a);
    check_same_shapes(b);
    if (!a.front().same_shape(b.front())) throw ShapeMismatchError("sample sets differ in shape");

    const std::size_t m = a.size(), n = b.size(), N = m + n;
    std::vector<const Field*> pool;
    pool.reserve(N);
    for (const Field& f : a) pool.push_back(&f);
    for (const Field& f : b) pool.push_back(&f);

    double m2 = median_pairwise_sq(pool);
    double gamma = m2 > 0.0 ? 1.0 / m2 : 0.0;

    // full kernel matrix of the pooled set, fixed across permutations
    std::vector<float> K(N * N, 1.0f);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            float k = static_cast<float>(std::exp(-gamma * squared_distance(*pool[i], *pool[j])));
            K[i * N + j] = k;
            K[j * N + i] = k;
        }
    }
    auto sums_for = [&](const std::vector<std::size_t>& labels_a) {
        std::vector<char> is_a(N, 0);
        for (std::size_t i : labels_a) is_a[i] = 1;
        KernelSums s;
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = i + 1; j < N; ++j) {
                double k = K[i * N + j];
                if (is_a[i] && is_a[j]) s.within_a += 2.0 * k;
                else if (!is_a[i] && !is_a[j]) s.within_b += 2.0 * k;
                else s.cross += k;
            }
        }
        return s;
    };

    MmdTestResult result;
    std::vector<std::size_t> original(m);
    std::iota(original.begin(), original.end(), 0);
    result.mmd = unbiased_mmd_from_sums(sums_for(original), m, n);

    RngStream rng(seed, 0xb001);
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    result.null_values.reserve(static_cast<std::size_t>(permutations));
    for (int p = 0; p < permutations; ++p) {
        for (std::size_t i = N - 1; i > 0; --i) {
            std::size_t j = rng.next_u64() % (i + 1);
            std::swap(perm[i], perm[j]);
        }
        std::vector<std::size_t> labels(perm.begin(), perm.begin() + static_cast<long>(m));
        result.null_values.push_back(unbiased_mmd_from_sums(sums_for(labels), m, n));
    }
    std::vector<double> sorted = result.null_values;
    std::sort(sorted.begin(), sorted.end());
    std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(sorted.size()))) - 1;
    result.null_q95 = sorted[std::min(idx, sorted.size() - 1)];
    return result;
}

namespace {

// Gradient magnitude with central differences inside, one-sided at borders.
std::vector<double> gradient_magnitude(const Field& f, int c) {
    const int H = f.height(), W = f.width();
    std::vector<double> g(static_cast<std::size_t>(H) * W);
    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            double gi = i == 0           ? f.at(c, 1, j) - f.at(c, 0, j)
                        : i == H - 1     ? f.at(c, H - 1, j) - f.at(c, H - 2, j)
                                         : 0.5 * (f.at(c, i + 1, j) - f.at(c, i - 1, j));
            double gj = j == 0           ? f.at(c, i, 1) - f.at(c, i, 0)
                        : j == W - 1     ? f.at(c, i, W - 1) - f.at(c, i, W - 2)
                                         : 0.5 * (f.at(c, i, j + 1) - f.at(c, i, j - 1));
            g[static_cast<std::size_t>(i) * W + j] = std::hypot(gi, gj);
        }
    }
    return g;
}

}  // namespace

double edge_correlation(const Field& a, const Field& b) {
    if (!a.same_shape(b)) throw ShapeMismatchError("edge correlation needs equal shapes");
    if (a.height() < 2 || a.width() < 2) {
        throw DimensionError("edge correlation needs at least a 2x2 grid");
    }
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        std::vector<double> ga = gradient_magnitude(a, c);
        std::vector<double> gb = gradient_magnitude(b, c);
        const double n = static_cast<double>(ga.size());
        double ma = std::accumulate(ga.begin(), ga.end(), 0.0) / n;
        double mb = std::accumulate(gb.begin(), gb.end(), 0.0) / n;
        double saa = 0.0, sbb = 0.0, sab = 0.0;
        for (std::size_t k = 0; k < ga.size(); ++k) {
            double da = ga[k] - ma, db = gb[k] - mb;
            saa += da * da;
            sbb += db * db;
            sab += da * db;
        }
        if (!(saa > 0.0) || !(sbb > 0.0)) {
            throw DegenerateVarianceError(
                "edge correlation undefined: a gradient-magnitude map is constant");
        }
        total += sab / std::sqrt(saa * sbb);
    }
    return total / a.channels();
}

void montage(const std::vector<Field>& tiles, int columns, const std::filesystem::path& image_path,
             const std::vector<std::string>& row_labels,
             const std::filesystem::path& index_path) {
    if (tiles.empty()) throw ConfigError("montage: no tiles");
    if (columns < 1) throw ConfigError("montage: columns must be positive");
    check_same_shapes(tiles);
    const int th = tiles.front().height(), tw = tiles.front().width();
    const int channels = tiles.front().channels();
    const int rows = static_cast<int>((tiles.size() + columns - 1) / columns);
    const int H = rows * th + (rows - 1);
    const int W = columns * tw + (columns - 1);
    Field canvas(channels, H, W, 1.0);  // separators render white
    for (std::size_t idx = 0; idx < tiles.size(); ++idx) {
        int r = static_cast<int>(idx) / columns;
        int col = static_cast<int>(idx) % columns;
        int oi = r * (th + 1);
        int oj = col * (tw + 1);
        for (int c = 0; c < channels; ++c) {
            for (int i = 0; i < th; ++i) {
                for (int j = 0; j < tw; ++j) {
                    canvas.at(c, oi + i, oj + j) = tiles[idx].at(c, i, j);
                }
            }
        }
    }
    write_image(canvas, image_path);

    std::ofstream index(index_path);
    if (!index) throw IoError("cannot write montage index " + index_path.string());
    index << "tiles=" << tiles.size() << " rows=" << rows << " columns=" << columns
          << " tile=" << channels << "x" << th << "x" << tw << "\n";
    for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) {
        index << "row " << r << ": "
              << (r < row_labels.size() ? row_labels[r] : std::string("unlabeled")) << "\n";
    }
}

}  // namespace asgm
