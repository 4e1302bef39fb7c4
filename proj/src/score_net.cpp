#include "asgm/score_net.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "asgm/errors.hpp"
#include "asgm/rng.hpp"
#include "asgm/snapshot.hpp"

namespace asgm {

double TimeEmbedding::frequency(int f) const {
    if (n_frequencies == 1) return min_freq;
    return min_freq * std::pow(max_freq / min_freq,
                               static_cast<double>(f) / (n_frequencies - 1));
}

void TimeEmbedding::features(double t, double* out) const {
    for (int f = 0; f < n_frequencies; ++f) {
        double w = frequency(f);
        out[2 * f] = std::sin(w * t);
        out[2 * f + 1] = std::cos(w * t);
    }
}

struct ScoreNetwork::Views {
    Eigen::Map<Eigen::MatrixXd> w1, w2, w3;
    Eigen::Map<Eigen::VectorXd> b1, b2, b3;
};

ScoreNetwork::Views ScoreNetwork::views_of(Eigen::VectorXd& storage) const {
    double* p = storage.data();
    const int in = input_dim_, h = hidden_width_, out = field_dim_;
    Eigen::Map<Eigen::MatrixXd> w1(p, h, in);
    p += static_cast<std::ptrdiff_t>(h) * in;
    Eigen::Map<Eigen::VectorXd> b1(p, h);
    p += h;
    Eigen::Map<Eigen::MatrixXd> w2(p, h, h);
    p += static_cast<std::ptrdiff_t>(h) * h;
    Eigen::Map<Eigen::VectorXd> b2(p, h);
    p += h;
    Eigen::Map<Eigen::MatrixXd> w3(p, out, h);
    p += static_cast<std::ptrdiff_t>(out) * h;
    Eigen::Map<Eigen::VectorXd> b3(p, out);
    return Views{w1, w2, w3, b1, b2, b3};
}

ScoreNetwork::Views ScoreNetwork::views() const {
    return views_of(const_cast<Eigen::VectorXd&>(params_));
}

ScoreNetwork::ScoreNetwork(int channels, int height, int width, int hidden_width,
                           TimeEmbedding embedding, std::uint64_t init_seed)
    : channels_(channels),
      height_(height),
      width_(width),
      field_dim_(channels * height * width),
      input_dim_(field_dim_ + embedding.dim()),
      hidden_width_(hidden_width),
      embedding_(embedding) {
    if (hidden_width < 1) throw ConfigError("hidden width must be positive");
    long count = static_cast<long>(hidden_width_) * input_dim_ + hidden_width_ +
                 static_cast<long>(hidden_width_) * hidden_width_ + hidden_width_ +
                 static_cast<long>(field_dim_) * hidden_width_ + field_dim_;
    params_ = Eigen::VectorXd::Zero(count);
    Views v = views_of(params_);
    RngStream rng(init_seed, 0xC0FFEE);
    auto fill = [&](Eigen::Map<Eigen::MatrixXd>& m, int fan_in) {
        double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = scale * rng.normal();
        }
    };
    fill(v.w1, input_dim_);
    fill(v.w2, hidden_width_);
    // w3 and all biases stay zero: an untrained model outputs the zero score
}

Eigen::VectorXd ScoreNetwork::forward(const Eigen::VectorXd& x, double t) const {
    if (x.size() != field_dim_) throw ShapeMismatchError("network input size mismatch");
    Views v = views();
    Eigen::VectorXd u(input_dim_);
    u.head(field_dim_) = x;
    embedding_.features(t, u.data() + field_dim_);
    Eigen::VectorXd a1 = (v.w1 * u + v.b1).array().tanh();
    Eigen::VectorXd a2 = (v.w2 * a1 + v.b2).array().tanh();
    return v.w3 * a2 + v.b3;
}

Field ScoreNetwork::score(double t, const Field& x) const {
    if (x.channels() != channels_ || x.height() != height_ || x.width() != width_) {
        throw ShapeMismatchError("field shape does not match the network");
    }
    Eigen::Map<const Eigen::VectorXd> xv(x.values().data(), field_dim_);
    Eigen::VectorXd out = forward(xv, t);
    Field s = Field::zeros_like(x);
    Eigen::Map<Eigen::VectorXd>(s.values().data(), field_dim_) = out;
    return s;
}

double ScoreNetwork::example_loss_and_grad(const Eigen::VectorXd& x, double t,
                                           const Eigen::VectorXd& target, double weight,
                                           Eigen::VectorXd& grad) const {
    if (grad.size() != params_.size()) throw ShapeMismatchError("gradient buffer size mismatch");
    Views v = views();
    Eigen::VectorXd u(input_dim_);
    u.head(field_dim_) = x;
    embedding_.features(t, u.data() + field_dim_);

    Eigen::VectorXd z1 = v.w1 * u + v.b1;
    Eigen::VectorXd a1 = z1.array().tanh();
    Eigen::VectorXd z2 = v.w2 * a1 + v.b2;
    Eigen::VectorXd a2 = z2.array().tanh();
    Eigen::VectorXd out = v.w3 * a2 + v.b3;

    Eigen::VectorXd r = out - target;
    double loss = weight * r.squaredNorm() / field_dim_;

    // d loss / d out
    Eigen::VectorXd g_out = (2.0 * weight / field_dim_) * r;

    Views g = views_of(grad);
    g.w3 += g_out * a2.transpose();
    g.b3 += g_out;
    Eigen::VectorXd g_a2 = v.w3.transpose() * g_out;
    Eigen::VectorXd g_z2 = g_a2.array() * (1.0 - a2.array().square());
    g.w2 += g_z2 * a1.transpose();
    g.b2 += g_z2;
    Eigen::VectorXd g_a1 = v.w2.transpose() * g_z2;
    Eigen::VectorXd g_z1 = g_a1.array() * (1.0 - a1.array().square());
    g.w1 += g_z1 * u.transpose();
    g.b1 += g_z1;
    return loss;
}

namespace {

Field tensor_to_field(const Eigen::Map<Eigen::MatrixXd>& m) {
    Field f(1, static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            f.at(0, static_cast<int>(r), static_cast<int>(c)) = m(r, c);
        }
    }
    return f;
}

}  // namespace

void ScoreNetwork::save_checkpoint(const std::filesystem::path& dir,
                                   const std::string& config_echo) const {
    std::filesystem::create_directories(dir);
    Views v = views();
    save_snapshot(tensor_to_field(v.w1), dir / "w1.tsnap");
    save_snapshot(tensor_to_field(v.w2), dir / "w2.tsnap");
    save_snapshot(tensor_to_field(v.w3), dir / "w3.tsnap");
    auto save_vec = [&](const Eigen::Map<Eigen::VectorXd>& b, const char* name) {
        Field f(1, 1, static_cast<int>(b.size()));
        for (Eigen::Index k = 0; k < b.size(); ++k) f.at(0, 0, static_cast<int>(k)) = b(k);
        save_snapshot(f, dir / name);
    };
    save_vec(v.b1, "b1.tsnap");
    save_vec(v.b2, "b2.tsnap");
    save_vec(v.b3, "b3.tsnap");

    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("cannot write checkpoint manifest in " + dir.string());
    manifest << "format=asgm-score-checkpoint-1\n";
    manifest << "channels=" << channels_ << "\n";
    manifest << "height=" << height_ << "\n";
    manifest << "width=" << width_ << "\n";
    manifest << "hidden_width=" << hidden_width_ << "\n";
    manifest << "time_frequencies=" << embedding_.n_frequencies << "\n";
    manifest << "time_min_freq=" << embedding_.min_freq << "\n";
    manifest << "time_max_freq=" << embedding_.max_freq << "\n";
    manifest << "layers=" << field_dim_ + embedding_.dim() << "," << hidden_width_ << ","
             << hidden_width_ << "," << field_dim_ << "\n";
    manifest << "# training config\n" << config_echo;
}

ScoreNetwork ScoreNetwork::load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("cannot open checkpoint manifest in " + dir.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw FormatError(std::string("checkpoint manifest missing key ") + key);
        }
        return it->second;
    };
    if (need("format") != "asgm-score-checkpoint-1") {
        throw FormatError("unknown checkpoint format tag");
    }
    TimeEmbedding emb;
    emb.n_frequencies = std::stoi(need("time_frequencies"));
    emb.min_freq = std::stod(need("time_min_freq"));
    emb.max_freq = std::stod(need("time_max_freq"));
    ScoreNetwork net(std::stoi(need("channels")), std::stoi(need("height")),
                     std::stoi(need("width")), std::stoi(need("hidden_width")), emb, 0);

    Views v = net.views_of(net.params_);
    auto load_mat = [&](Eigen::Map<Eigen::MatrixXd>& m, const char* name) {
        Field f = load_snapshot(dir / name);
        if (f.height() != m.rows() || f.width() != m.cols()) {
            throw FormatError(std::string("checkpoint tensor shape mismatch for ") + name);
        }
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                m(r, c) = f.at(0, static_cast<int>(r), static_cast<int>(c));
            }
        }
    };
    auto load_vec = [&](Eigen::Map<Eigen::VectorXd>& b, const char* name) {
        Field f = load_snapshot(dir / name);
        if (static_cast<Eigen::Index>(f.size()) != b.size()) {
            throw FormatError(std::string("checkpoint tensor shape mismatch for ") + name);
        }
        for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = f.values()[static_cast<std::size_t>(k)];
    };
    load_mat(v.w1, "w1.tsnap");
    load_mat(v.w2, "w2.tsnap");
    load_mat(v.w3, "w3.tsnap");
    load_vec(v.b1, "b1.tsnap");
    load_vec(v.b2, "b2.tsnap");
    load_vec(v.b3, "b3.tsnap");
    return net;
}


namespace {

// parameter layout of the linear model: P (n x n), then Q_f (n x n) per
// feature, then b (n), then B (n x emb_dim), all column-major
struct LinearLayout {
    long p_offset;
    long q_offset;
    long b_offset;
    long bt_offset;
    long total;
};

LinearLayout linear_layout(int n, int emb_dim) {
    LinearLayout l;
    l.p_offset = 0;
    l.q_offset = static_cast<long>(n) * n;
    l.b_offset = l.q_offset + static_cast<long>(emb_dim) * n * n;
    l.bt_offset = l.b_offset + n;
    l.total = l.bt_offset + static_cast<long>(n) * emb_dim;
    return l;
}

}  // namespace

LinearScoreModel::LinearScoreModel(int channels, int height, int width, TimeEmbedding embedding)
    : channels_(channels),
      height_(height),
      width_(width),
      field_dim_(channels * height * width),
      embedding_(embedding) {
    params_ = Eigen::VectorXd::Zero(linear_layout(field_dim_, embedding_.dim()).total);
}

Eigen::VectorXd LinearScoreModel::forward(const Eigen::VectorXd& x, double t) const {
    if (x.size() != field_dim_) throw ShapeMismatchError("linear model input size mismatch");
    const int n = field_dim_;
    const int F = embedding_.dim();
    LinearLayout l = linear_layout(n, F);
    Eigen::VectorXd e(F);
    embedding_.features(t, e.data());
    const double* p = params_.data();
    Eigen::Map<const Eigen::MatrixXd> P(p + l.p_offset, n, n);
    Eigen::Map<const Eigen::VectorXd> b(p + l.b_offset, n);
    Eigen::Map<const Eigen::MatrixXd> B(p + l.bt_offset, n, F);
    Eigen::VectorXd out = P * x + b + B * e;
    for (int f = 0; f < F; ++f) {
        Eigen::Map<const Eigen::MatrixXd> Q(p + l.q_offset + static_cast<long>(f) * n * n, n, n);
        out.noalias() += e(f) * (Q * x);
    }
    return out;
}

Field LinearScoreModel::score(double t, const Field& x) const {
    if (x.channels() != channels_ || x.height() != height_ || x.width() != width_) {
        throw ShapeMismatchError("field shape does not match the model");
    }
    Eigen::Map<const Eigen::VectorXd> xv(x.values().data(), field_dim_);
    Eigen::VectorXd out = forward(xv, t);
    Field s = Field::zeros_like(x);
    Eigen::Map<Eigen::VectorXd>(s.values().data(), field_dim_) = out;
    return s;
}

double LinearScoreModel::example_loss_and_grad(const Eigen::VectorXd& x, double t,
                                               const Eigen::VectorXd& target, double weight,
                                               Eigen::VectorXd& grad) const {
    if (grad.size() != params_.size()) throw ShapeMismatchError("gradient buffer size mismatch");
    const int n = field_dim_;
    const int F = embedding_.dim();
    LinearLayout l = linear_layout(n, F);
    Eigen::VectorXd e(F);
    embedding_.features(t, e.data());

    Eigen::VectorXd out = forward(x, t);
    Eigen::VectorXd r = out - target;
    double loss = weight * r.squaredNorm() / n;
    Eigen::VectorXd g_out = (2.0 * weight / n) * r;

    double* g = grad.data();
    Eigen::Map<Eigen::MatrixXd>(g + l.p_offset, n, n).noalias() += g_out * x.transpose();
    for (int f = 0; f < F; ++f) {
        Eigen::Map<Eigen::MatrixXd>(g + l.q_offset + static_cast<long>(f) * n * n, n, n)
            .noalias() += e(f) * (g_out * x.transpose());
    }
    Eigen::Map<Eigen::VectorXd>(g + l.b_offset, n) += g_out;
    Eigen::Map<Eigen::MatrixXd>(g + l.bt_offset, n, F).noalias() += g_out * e.transpose();
    return loss;
}

}  // namespace asgm
