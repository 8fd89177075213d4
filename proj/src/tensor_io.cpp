#include "semsal/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace semsal {

namespace {

constexpr std::string_view kMagic = "GTSR1\n";

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw FormatError("GTSR1: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_gtsr(std::ostream& out, const Tensor& t) {
    out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto extent : t.shape()) put_u32(out, static_cast<std::uint32_t>(extent));
    for (double v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

Tensor read_gtsr(std::istream& in) {
    std::array<char, 6> magic{};
    if (!in.read(magic.data(), 6) || std::string_view(magic.data(), 6) != kMagic) {
        throw FormatError("GTSR1: bad magic");
    }
    const std::uint32_t rank = get_u32(in);
    if (rank == 0 || rank > 8) throw FormatError("GTSR1: unsupported rank " + std::to_string(rank));
    Shape shape;
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        const std::uint32_t extent = get_u32(in);
        if (extent == 0) throw FormatError("GTSR1: zero extent");
        shape.push_back(extent);
        n *= extent;
        if (n > (std::size_t{1} << 32)) throw FormatError("GTSR1: tensor too large");
    }
    std::vector<double> data(n);
    for (auto& v : data) v = static_cast<double>(std::bit_cast<float>(get_u32(in)));
    return Tensor(std::move(shape), std::move(data));
}

void save_gtsr(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    write_gtsr(out, t);
    if (!out) throw FormatError("write failed for " + path.string());
}

Tensor load_gtsr(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return read_gtsr(in);
}

void snap_to_f32(Tensor& t) {
    for (auto& v : t.mutable_data()) v = static_cast<double>(static_cast<float>(v));
}

void save_pgm(const std::filesystem::path& path, const Tensor& map) {
    std::size_t h = 0, w = 0;
    if (map.rank() == 2) {
        h = map.dim(0);
        w = map.dim(1);
    } else if (map.rank() == 3 && map.dim(0) == 1) {
        h = map.dim(1);
        w = map.dim(2);
    } else {
        throw ShapeError("save_pgm: expected H x W or 1 x H x W, got " + shape_string(map.shape()));
    }
    auto v = map.data();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double range = *hi - *lo;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "P5\n" << w << " " << h << "\n255\n";
    for (double x : v) {
        const double scaled = range > 0 ? (x - *lo) / range : 0.0;
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(scaled * 255.0))));
    }
}

Tensor load_pnm_rgb(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P6") throw FormatError(path.string() + ": only binary P5/P6 images are supported");
    auto next_int = [&]() {
        in >> std::ws;
        while (in.peek() == '#') {
            std::string comment;
            std::getline(in, comment);
            in >> std::ws;
        }
        long value = -1;
        if (!(in >> value) || value <= 0) throw FormatError(path.string() + ": bad header");
        return static_cast<std::size_t>(value);
    };
    const std::size_t w = next_int(), h = next_int(), maxval = next_int();
    if (maxval > 255) throw FormatError(path.string() + ": 16-bit images are not supported");
    in.get();
    const std::size_t channels = magic == "P6" ? 3 : 1;
    std::vector<unsigned char> raw(w * h * channels);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw FormatError(path.string() + ": truncated pixel data");
    }
    std::vector<double> data(3 * h * w);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < h * w; ++i) {
            const unsigned char px = channels == 3 ? raw[i * 3 + c] : raw[i];
            data[c * h * w + i] = static_cast<double>(px) / static_cast<double>(maxval);
        }
    return Tensor({3, h, w}, std::move(data));
}

}  // namespace semsal
