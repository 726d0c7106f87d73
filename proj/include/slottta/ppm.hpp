#pragma once

#include <string>
#include <vector>

#include "slottta/tensor.hpp"

namespace slottta {

// Binary PPM (P6), values clamped to [0,1].
void write_ppm(const std::string& path, const Tensor<float>& image_hw3);
std::string encode_ppm(const Tensor<float>& image_hw3);

// Color-codes per-pixel slot indices with a fixed palette.
void write_mask_ppm(const std::string& path, const std::vector<int>& mask, int h, int w);
Tensor<float> colorize_mask(const std::vector<int>& mask, int h, int w);

}  // namespace slottta
