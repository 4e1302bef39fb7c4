#include "asgm/image_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "asgm/errors.hpp"

namespace asgm {

namespace {

// Reads the next whitespace/comment-delimited token of a PNM header.
std::string next_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

int parse_positive(const std::string& tok, const char* what) {
    if (tok.empty()) throw FormatError(std::string("malformed image header: missing ") + what);
    for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw FormatError(std::string("malformed image header: bad ") + what + " '" + tok +
                              "'");
    }
    long v = std::stol(tok);
    if (v <= 0) throw FormatError(std::string("malformed image header: nonpositive ") + what);
    return static_cast<int>(v);
}

}  // namespace

Field read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image " + path.string());

    std::string magic = next_token(in);
    int channels;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw FormatError("malformed image header: expected P5 or P6, got '" + magic + "'");
    }
    int width = parse_positive(next_token(in), "width");
    int height = parse_positive(next_token(in), "height");
    int maxval = parse_positive(next_token(in), "maxval");
    if (maxval != 255) {
        throw FormatError("unsupported depth: maxval " + std::to_string(maxval) +
                          " (only 8-bit supported)");
    }
    // The header terminates with exactly one whitespace byte, already
    // consumed by next_token.
    std::size_t n = static_cast<std::size_t>(width) * height * channels;
    std::vector<std::uint8_t> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw FormatError("truncated image payload in " + path.string());
    }

    // Pixel-interleaved bytes -> channel-major field.
    Field f(channels, height, width);
    std::size_t idx = 0;
    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            for (int c = 0; c < channels; ++c) {
                f.at(c, i, j) = 2.0 * (bytes[idx++] / 255.0) - 1.0;
            }
        }
    }
    return f;
}

void write_image(const Field& field, const std::filesystem::path& path) {
    if (!field.all_finite()) throw NumericError("refusing to write non-finite field");
    if (field.channels() != 1 && field.channels() != 3) {
        throw FormatError("image output supports 1 or 3 channels, got " +
                          std::to_string(field.channels()));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open image for writing: " + path.string());
    out << (field.channels() == 1 ? "P5" : "P6") << "\n"
        << field.width() << " " << field.height() << "\n255\n";
    std::vector<std::uint8_t> bytes;
    bytes.reserve(field.size());
    for (int i = 0; i < field.height(); ++i) {
        for (int j = 0; j < field.width(); ++j) {
            for (int c = 0; c < field.channels(); ++c) {
                double v = std::clamp(field.at(c, i, j), -1.0, 1.0);
                double b = std::round((v + 1.0) / 2.0 * 255.0);
                bytes.push_back(static_cast<std::uint8_t>(b));
            }
        }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing image " + path.string());
}

}  // namespace asgm
