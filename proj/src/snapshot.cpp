#include "asgm/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "asgm/errors.hpp"

namespace asgm {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'G', 'M', '0', '0', '0', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void save_snapshot(const Field& field, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open snapshot for writing: " + path.string());

    std::vector<std::uint8_t> buf;
    buf.reserve(24 + field.size() * 4);
    buf.insert(buf.end(), kMagic, kMagic + 8);
    put_u32(buf, static_cast<std::uint32_t>(field.channels()));
    put_u32(buf, static_cast<std::uint32_t>(field.height()));
    put_u32(buf, static_cast<std::uint32_t>(field.width()));
    put_u32(buf, 0);  // dtype f32
    for (double v : field.values()) {
        float f = static_cast<float>(v);
        std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
        put_u32(buf, bits);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("failed writing snapshot " + path.string());
}

Field load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot " + path.string());
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    if (buf.size() < 24 || std::memcmp(buf.data(), kMagic, 8) != 0) {
        throw FormatError("snapshot magic mismatch in " + path.string());
    }
    std::uint32_t channels = get_u32(buf.data() + 8);
    std::uint32_t height = get_u32(buf.data() + 12);
    std::uint32_t width = get_u32(buf.data() + 16);
    std::uint32_t dtype = get_u32(buf.data() + 20);
    if (dtype != 0) throw FormatError("snapshot dtype tag " + std::to_string(dtype) + " unknown");
    if (channels == 0 || height == 0 || width == 0 || channels > (1u << 16) ||
        height > (1u << 20) || width > (1u << 20)) {
        throw FormatError("snapshot header has implausible dimensions");
    }
    std::size_t n = static_cast<std::size_t>(channels) * height * width;
    if (buf.size() != 24 + n * 4) {
        throw FormatError("snapshot payload truncated in " + path.string() + " (expected " +
                          std::to_string(24 + n * 4) + " bytes, got " +
                          std::to_string(buf.size()) + ")");
    }
    Field f(static_cast<int>(channels), static_cast<int>(height), static_cast<int>(width));
    auto values = f.values();
    for (std::size_t k = 0; k < n; ++k) {
        std::uint32_t bits = get_u32(buf.data() + 24 + 4 * k);
        values[k] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return f;
}

}  // namespace asgm
