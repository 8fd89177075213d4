#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "semsal/tensor.hpp"

namespace semsal {

/// Malformed or unreadable input files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// GTSR1: "GTSR1\n", u32 LE rank, rank x u32 LE extents, f32 LE row-major data.
void write_gtsr(std::ostream& out, const Tensor& t);
Tensor read_gtsr(std::istream& in);
void save_gtsr(const std::filesystem::path& path, const Tensor& t);
Tensor load_gtsr(const std::filesystem::path& path);

/// Rounds every element to the nearest float32, in place, so that a tensor
/// survives a GTSR1 round trip unchanged.
void snap_to_f32(Tensor& t);

/// 8-bit binary PGM (P5) of an H x W or 1 x H x W map after min-max scaling.
void save_pgm(const std::filesystem::path& path, const Tensor& map);

/// Reads P5 (grey) or P6 (RGB) 8-bit images into a 3 x H x W tensor in [0,1].
/// Grey images are replicated across the three channels.
Tensor load_pnm_rgb(const std::filesystem::path& path);

}  // namespace semsal
