#include "deeprep/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace deeprep {

namespace {

constexpr char kMagic[4] = {'T', '3', 'D', '1'};
constexpr std::uint8_t kWidthDouble = 8;
constexpr std::uint8_t kWidthByte = 1;
constexpr Index kMaxEntries = Index(1) << 33;

void write_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64_le(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_header(std::ostream& out, const Dims& dims, std::uint8_t width) {
    out.write(kMagic, 4);
    for (Index d : dims) write_u64_le(out, static_cast<std::uint64_t>(d));
    out.put(static_cast<char>(width));
}

Dims read_header(std::istream& in, const std::string& path, std::uint8_t expected_width) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("load: bad magic in " + path);
    }
    Dims dims;
    for (Index& d : dims) {
        const std::uint64_t v = read_u64_le(in);
        if (v == 0 || v > static_cast<std::uint64_t>(kMaxEntries)) {
            throw std::runtime_error("load: dimension overflow in " + path);
        }
        d = static_cast<Index>(v);
    }
    if (dims[1] > kMaxEntries / dims[0] || dims[2] > kMaxEntries / (dims[0] * dims[1])) {
        throw std::runtime_error("load: dimension overflow in " + path);
    }
    const int width = in.get();
    if (!in || width != expected_width) {
        throw std::runtime_error("load: unexpected scalar width in " + path);
    }
    return dims;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

}  // namespace

void save_tensor(const Tensor3& t, const std::string& path) {
    if (t.empty()) throw std::invalid_argument("save_tensor: empty tensor");
    bool out_of_range = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double v = t.data()[i];
        if (v < 0.0 || v > 1.0) {
            out_of_range = true;
            break;
        }
    }
    if (out_of_range) {
        std::cerr << "warning: " << path << " has values outside [0,1]\n";
    }
    std::ofstream out = open_out(path);
    write_header(out, t.dims(), kWidthDouble);
    // Payload is little-endian f64; on this target that is the memory layout.
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!out) throw std::runtime_error("save_tensor: write failed for " + path);
}

Tensor3 load_tensor(const std::string& path) {
    std::ifstream in = open_in(path);
    const Dims dims = read_header(in, path, kWidthDouble);
    Tensor3 t(dims[0], dims[1], dims[2]);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(t.size() * sizeof(double))) {
        throw std::runtime_error("load_tensor: truncated payload in " + path);
    }
    return t;
}

void save_mask(const Mask& m, const std::string& path) {
    if (m.size() == 0) throw std::invalid_argument("save_mask: empty mask");
    std::ofstream out = open_out(path);
    write_header(out, m.dims(), kWidthByte);
    out.write(reinterpret_cast<const char*>(m.bits().data()),
              static_cast<std::streamsize>(m.size()));
    if (!out) throw std::runtime_error("save_mask: write failed for " + path);
}

Mask load_mask(const std::string& path) {
    std::ifstream in = open_in(path);
    const Dims dims = read_header(in, path, kWidthByte);
    Mask m(dims[0], dims[1], dims[2]);
    in.read(reinterpret_cast<char*>(m.bits().data()), static_cast<std::streamsize>(m.size()));
    if (in.gcount() != static_cast<std::streamsize>(m.size())) {
        throw std::runtime_error("load_mask: truncated payload in " + path);
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.bits()[i] > 1) throw std::runtime_error("load_mask: invalid mask byte in " + path);
    }
    return m;
}

void export_false_color(const Tensor3& t, const std::array<Index, 3>& bands,
                        const std::string& path) {
    for (Index b : bands) {
        if (b < 0 || b >= t.n3()) {
            throw std::invalid_argument("export_false_color: band index out of range");
        }
    }
    std::ofstream out = open_out(path);
    out << "P6\n" << t.n2() << " " << t.n1() << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(t.n2()) * 3);
    for (Index l = 0; l < t.n1(); ++l) {
        for (Index j = 0; j < t.n2(); ++j) {
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(t(l, j, bands[static_cast<std::size_t>(c)]), 0.0, 1.0);
                row[static_cast<std::size_t>(j * 3 + c)] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw std::runtime_error("export_false_color: write failed for " + path);
}

}  // namespace deeprep
