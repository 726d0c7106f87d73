#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slottta/tensor.hpp"

// Synthetic multi-sprite scenes: colored shapes rasterized back-to-front with
// occlusion over a plain background, with exact instance masks. No
// anti-aliasing, so masks are pixel-true.
namespace slottta {

struct ObjectMeta {
  std::string shape;             // square | circle | triangle
  std::array<float, 3> color{};  // fill (checker primary) color
  std::string texture;           // flat | checker
  float size = 0;                // half-extent in pixels
  float cx = 0, cy = 0;          // center, pixel coordinates
  int checker_phase = 0;
};

struct SceneSample {
  Tensor<float> image;  // {H, W, 3} in [0,1]
  Tensor<float> mask;   // {H, W} instance ids as floats; 0 = background
  int objects = 0;      // ids 1..objects are present
  std::vector<ObjectMeta> meta;  // meta[g-1] describes instance g
  uint64_t seed = 0;
};

struct GeneratorConfig {
  int height = 48;
  int width = 48;
  int min_objects = 2;
  int max_objects = 3;
  std::vector<std::string> shapes = {"square", "circle"};
  std::vector<std::array<float, 3>> palette;
  std::string texture = "flat";  // flat | checker
  float min_size = 4.0f;         // half-extent, pixels
  float max_size = 8.0f;
  std::array<float, 3> background = {0.10f, 0.10f, 0.10f};
};

// Pure function of (cfg, seed). Throws InputError on an invalid config and
// Error("placement...") when an object cannot be placed within 100 attempts.
SceneSample generate_scene(const GeneratorConfig& cfg, uint64_t seed);

// Instance ids present per pixel, as ints (0 = background).
std::vector<int> mask_labels(const SceneSample& s);

// Built-in palettes: disjoint color sets for the train and shifted splits.
std::vector<std::array<float, 3>> train_palette();
std::vector<std::array<float, 3>> shifted_palette();

}  // namespace slottta
