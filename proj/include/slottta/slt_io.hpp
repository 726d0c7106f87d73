#pragma once

#include <iosfwd>
#include <string>

#include "slottta/tensor.hpp"

// "SLT1" tensor container: magic (4 bytes), dtype code u8 (0 = f32, 1 = f64),
// ndim u32, dims u32 x ndim, payload row-major. All fields little-endian.
// Multiple records may be concatenated in one stream.
namespace slottta {

void write_slt(std::ostream& os, const Tensor<float>& t);
void write_slt(std::ostream& os, const Tensor<double>& t);

// `context` names the source (file path) in error messages.
Tensor<float> read_slt_f32(std::istream& is, const std::string& context);
Tensor<double> read_slt_f64(std::istream& is, const std::string& context);

// True when the stream has no further bytes.
bool at_eof(std::istream& is);

}  // namespace slottta
