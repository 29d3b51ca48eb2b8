#pragma once

#include <array>
#include <string>

#include "deeprep/tensor.hpp"

namespace deeprep {

// Binary tensor format: magic "T3D1", three u64 little-endian dims, one
// u8 scalar-width tag, then the row-major payload. Tensors use width 8
// (doubles), masks width 1 (one byte per entry, 1 = observed). Save/load
// round-trips are bit-exact.
void save_tensor(const Tensor3& t, const std::string& path);
Tensor3 load_tensor(const std::string& path);

void save_mask(const Mask& m, const std::string& path);
Mask load_mask(const std::string& path);

// Binary 8-bit PPM of three selected bands (0-based), clamped to [0,1]
// and scaled to 0..255.
void export_false_color(const Tensor3& t, const std::array<Index, 3>& bands,
                        const std::string& path);

}  // namespace deeprep
