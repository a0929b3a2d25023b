#include "lolb/nn/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace lolb::nn {

namespace {

constexpr std::array<char, 4> kMagic{'T', 'N', 'S', 'R'};
constexpr std::uint32_t kMaxRank = 8;

void put_u32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated tensor header");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

}  // namespace

void write_tensor(std::ostream& os, const TensorF& t) {
    os.write(kMagic.data(), kMagic.size());
    put_u32(os, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.dims()) put_u32(os, static_cast<std::uint32_t>(d));
    for (float v : t.data()) put_u32(os, std::bit_cast<std::uint32_t>(v));
    if (!os) throw IoError("failed writing tensor");
}

TensorF read_tensor(std::istream& is) {
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw IoError("not a TNSR tensor file (bad magic)");
    const std::uint32_t rank = get_u32(is);
    if (rank > kMaxRank) throw IoError("tensor rank " + std::to_string(rank) + " exceeds limit");
    std::vector<int> dims(rank);
    for (auto& d : dims) {
        const std::uint32_t v = get_u32(is);
        if (v > (1u << 28)) throw IoError("tensor dimension too large");
        d = static_cast<int>(v);
    }
    TensorF t(dims);
    for (auto& v : t.data()) {
        unsigned char b[4];
        if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated tensor payload");
        v = std::bit_cast<float>(std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
                                 (std::uint32_t(b[3]) << 24));
    }
    return t;
}

void save_tensor(const std::filesystem::path& path, const TensorF& t) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_tensor(os, t);
}

TensorF load_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open tensor file " + path.string());
    try {
        return read_tensor(is);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace lolb::nn
