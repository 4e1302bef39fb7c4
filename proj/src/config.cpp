#include "asgm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "asgm/errors.hpp"

namespace asgm {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse number '" + value + "'");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse integer '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse unsigned '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

Transition make_transition(const std::string& role, const std::string& kind, double v_min,
                           double v_max, double exponent) {
    if (kind == "constant") return Transition::constant(v_min);
    if (kind == "geometric") return Transition::geometric(v_min, v_max);
    if (kind == "power") return Transition::power(v_min, v_max, exponent);
    if (kind == "exponential-blowup") return Transition::exponential_blowup(v_min, exponent);
    if (kind == "infinite") return Transition::infinite();
    throw ConfigError("unknown transition kind '" + kind + "' for " + role);
}

}  // namespace

Schedule RunConfig::make_schedule(int image_size) const {
    if (!preset.empty()) {
        Schedule s = preset_schedule(preset, image_size);
        s.terminal_time = terminal_time;
        return s;
    }
    Schedule s;
    s.phi1 = make_transition("phi1", phi1_kind, phi1_min, phi1_max, phi1_exponent);
    s.phi2 = make_transition("phi2", phi2_kind, phi2_min, phi2_max, phi2_exponent);
    s.lambda1 = make_transition("lambda1", lambda1_kind, lambda1_min, lambda1_min,
                                lambda1_exponent);
    s.lambda2 = make_transition("lambda2", lambda2_kind, lambda2_min, lambda2_min,
                                lambda2_exponent);
    s.terminal_time = terminal_time;
    s.correlation_length = epsilon;
    return s;
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    os.precision(17);
    os << "corrector.snr=" << corrector_snr << "\n";
    os << "corrector.steps=" << corrector_steps << "\n";
    os << "data.channels=" << data_channels << "\n";
    os << "data.count=" << data_count << "\n";
    os << "data.dir=" << data_dir << "\n";
    os << "data.size=" << data_size << "\n";
    os << "data.synthetic=" << synthetic << "\n";
    os << "dt=" << dt << "\n";
    os << "epsilon=" << epsilon << "\n";
    os << "gamma=" << gamma << "\n";
    if (preset.empty()) {
        os << "lambda1.exponent=" << lambda1_exponent << "\n";
        os << "lambda1.kind=" << lambda1_kind << "\n";
        os << "lambda1.min=" << lambda1_min << "\n";
        os << "lambda2.exponent=" << lambda2_exponent << "\n";
        os << "lambda2.kind=" << lambda2_kind << "\n";
        os << "lambda2.min=" << lambda2_min << "\n";
    }
    os << "n_samples=" << n_samples << "\n";
    if (!checkpoint.empty()) os << "checkpoint=" << checkpoint << "\n";
    if (!calibration_dir.empty()) os << "calibration.dir=" << calibration_dir << "\n";
    if (!image.empty()) os << "image=" << image << "\n";
    if (preset.empty()) {
        os << "phi1.exponent=" << phi1_exponent << "\n";
        os << "phi1.kind=" << phi1_kind << "\n";
        os << "phi1.max=" << phi1_max << "\n";
        os << "phi1.min=" << phi1_min << "\n";
        os << "phi2.exponent=" << phi2_exponent << "\n";
        os << "phi2.kind=" << phi2_kind << "\n";
        os << "phi2.max=" << phi2_max << "\n";
        os << "phi2.min=" << phi2_min << "\n";
    } else {
        os << "preset=" << preset << "\n";
    }
    if (!prior_file.empty()) os << "prior.file=" << prior_file << "\n";
    if (!reference_dir.empty()) os << "reference.dir=" << reference_dir << "\n";
    os << "record_every=" << record_every << "\n";
    os << "score=" << score_source << "\n";
    os << "seed=" << seed << "\n";
    os << "T=" << terminal_time << "\n";
    os << "t0=" << t0 << "\n";
    os << "kmeans.guide=" << (kmeans_guide ? "true" : "false") << "\n";
    os << "kmeans.k=" << kmeans_k << "\n";
    os << "train.batch=" << train_batch << "\n";
    os << "train.iterations=" << train_iterations << "\n";
    os << "train.lr=" << train_lr << "\n";
    os << "train.width=" << train_width << "\n";
    return os.str();
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + " is not key=value: '" +
                              line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ConfigError("duplicate config key '" + key + "'");
        }

        if (key == "preset") cfg.preset = value;
        else if (key == "phi1.kind") cfg.phi1_kind = value;
        else if (key == "phi1.min") cfg.phi1_min = parse_double(key, value);
        else if (key == "phi1.max") cfg.phi1_max = parse_double(key, value);
        else if (key == "phi1.exponent") cfg.phi1_exponent = parse_double(key, value);
        else if (key == "phi2.kind") cfg.phi2_kind = value;
        else if (key == "phi2.min") cfg.phi2_min = parse_double(key, value);
        else if (key == "phi2.max") cfg.phi2_max = parse_double(key, value);
        else if (key == "phi2.exponent") cfg.phi2_exponent = parse_double(key, value);
        else if (key == "lambda1.kind") cfg.lambda1_kind = value;
        else if (key == "lambda1.min") cfg.lambda1_min = parse_double(key, value);
        else if (key == "lambda1.exponent") cfg.lambda1_exponent = parse_double(key, value);
        else if (key == "lambda2.kind") cfg.lambda2_kind = value;
        else if (key == "lambda2.min") cfg.lambda2_min = parse_double(key, value);
        else if (key == "lambda2.exponent") cfg.lambda2_exponent = parse_double(key, value);
        else if (key == "T") cfg.terminal_time = parse_double(key, value);
        else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
        else if (key == "dt") cfg.dt = parse_double(key, value);
        else if (key == "gamma") cfg.gamma = parse_double(key, value);
        else if (key == "record_every") cfg.record_every = static_cast<int>(parse_long(key, value));
        else if (key == "seed") cfg.seed = parse_u64(key, value);
        else if (key == "n_samples") cfg.n_samples = static_cast<int>(parse_long(key, value));
        else if (key == "corrector.steps") cfg.corrector_steps = static_cast<int>(parse_long(key, value));
        else if (key == "corrector.snr") cfg.corrector_snr = parse_double(key, value);
        else if (key == "score") cfg.score_source = value;
        else if (key == "t0") cfg.t0 = parse_double(key, value);
        else if (key == "kmeans.k") cfg.kmeans_k = static_cast<int>(parse_long(key, value));
        else if (key == "kmeans.guide") cfg.kmeans_guide = parse_bool(key, value);
        else if (key == "train.iterations") cfg.train_iterations = parse_long(key, value);
        else if (key == "train.batch") cfg.train_batch = static_cast<int>(parse_long(key, value));
        else if (key == "train.lr") cfg.train_lr = parse_double(key, value);
        else if (key == "train.width") cfg.train_width = static_cast<int>(parse_long(key, value));
        else if (key == "data.dir") cfg.data_dir = value;
        else if (key == "data.synthetic") cfg.synthetic = value;
        else if (key == "data.count") cfg.data_count = static_cast<int>(parse_long(key, value));
        else if (key == "data.size") cfg.data_size = static_cast<int>(parse_long(key, value));
        else if (key == "data.channels") cfg.data_channels = static_cast<int>(parse_long(key, value));
        else if (key == "out.dir") cfg.out_dir = value;
        else if (key == "checkpoint") cfg.checkpoint = value;
        else if (key == "image") cfg.image = value;
        else if (key == "reference.dir") cfg.reference_dir = value;
        else if (key == "prior.file") cfg.prior_file = value;
        else if (key == "calibration.dir") cfg.calibration_dir = value;
        else if (key == "threads") cfg.threads = static_cast<int>(parse_long(key, value));
        else throw ConfigError("unknown config key '" + key + "'");
    }

    if (cfg.corrector_steps < 0) throw ConfigError("corrector.steps must be >= 0");
    if (!(cfg.corrector_snr > 0.0)) throw ConfigError("corrector.snr must be positive");
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(cfg.terminal_time > 0.0)) throw ConfigError("T must be positive");
    if (cfg.n_samples < 0) throw ConfigError("n_samples must be >= 0");
    if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
    if (!cfg.preset.empty() && cfg.preset != "ve-noise" && cfg.preset != "aniso-heat" &&
        cfg.preset != "iso-heat") {
        throw ConfigError("unknown preset '" + cfg.preset + "'");
    }
    if (cfg.score_source != "analytic" && cfg.score_source != "checkpoint") {
        throw ConfigError("score must be 'analytic' or 'checkpoint'");
    }
    return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace asgm
