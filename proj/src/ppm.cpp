#include "slottta/ppm.hpp"

#include <algorithm>
#include <sstream>

#include "slottta/csvio.hpp"
#include "slottta/errors.hpp"

namespace slottta {

std::string encode_ppm(const Tensor<float>& img) {
  if (img.rank() != 3 || img.dim(2) != 3) throw ShapeError("ppm: image must be HxWx3, got " + shape_str(img.shape));
  const int h = img.dim(0), w = img.dim(1);
  std::ostringstream os;
  os << "P6\n" << w << " " << h << "\n255\n";
  std::string body;
  body.reserve(static_cast<size_t>(h) * w * 3);
  for (size_t i = 0; i < img.data.size(); ++i) {
    const float v = std::clamp(img.data[i], 0.0f, 1.0f);
    body.push_back(static_cast<char>(static_cast<int>(v * 255.0f + 0.5f)));
  }
  os << body;
  return os.str();
}

void write_ppm(const std::string& path, const Tensor<float>& img) {
  atomic_write_file(path, encode_ppm(img));
}

Tensor<float> colorize_mask(const std::vector<int>& mask, int h, int w) {
  static const float palette[][3] = {
      {0.05f, 0.05f, 0.05f}, {0.90f, 0.20f, 0.20f}, {0.20f, 0.80f, 0.25f}, {0.25f, 0.40f, 0.95f},
      {0.95f, 0.90f, 0.20f}, {0.85f, 0.30f, 0.85f}, {0.25f, 0.85f, 0.85f}, {0.95f, 0.55f, 0.15f},
      {0.60f, 0.60f, 0.60f}, {0.45f, 0.25f, 0.10f}};
  constexpr int kColors = 10;
  if (static_cast<int>(mask.size()) != h * w) throw ShapeError("colorize_mask: label count does not match grid");
  Tensor<float> img = Tensor<float>::zeros({h, w, 3});
  for (size_t i = 0; i < mask.size(); ++i) {
    const int id = mask[i] < 0 ? 0 : mask[i] % kColors;
    for (int c = 0; c < 3; ++c) img.data[i * 3 + c] = palette[id][c];
  }
  return img;
}

void write_mask_ppm(const std::string& path, const std::vector<int>& mask, int h, int w) {
  write_ppm(path, colorize_mask(mask, h, w));
}

}  // namespace slottta
