#include "slottta/sprites.hpp"

#include <algorithm>
#include <cmath>

#include "slottta/errors.hpp"
#include "slottta/rng.hpp"

namespace slottta {

namespace {

bool inside_shape(const ObjectMeta& o, float px, float py) {
  const float dx = px - o.cx;
  const float dy = py - o.cy;
  const float s = o.size;
  if (o.shape == "square") return std::abs(dx) <= s && std::abs(dy) <= s;
  if (o.shape == "circle") return dx * dx + dy * dy <= s * s;
  // upward triangle: apex at (cx, cy - s), base at cy + s
  if (dy < -s || dy > s) return false;
  return std::abs(dx) <= 0.5f * (dy + s);
}

std::array<float, 3> texel(const ObjectMeta& o, int px, int py) {
  if (o.texture == "checker") {
    const int cell = 3;
    const bool alt = ((px / cell + py / cell + o.checker_phase) % 2) != 0;
    if (alt) return {o.color[0] * 0.35f, o.color[1] * 0.35f, o.color[2] * 0.35f};
  }
  return o.color;
}

}  // namespace

SceneSample generate_scene(const GeneratorConfig& cfg, uint64_t seed) {
  if (cfg.min_objects < 1 || cfg.max_objects < cfg.min_objects)
    throw InputError("generate_scene: bad object count range");
  if (cfg.shapes.empty() || cfg.palette.empty()) throw InputError("generate_scene: empty shape set or palette");
  for (const auto& s : cfg.shapes)
    if (s != "square" && s != "circle" && s != "triangle")
      throw InputError("generate_scene: unknown shape '" + s + "'");
  if (cfg.texture != "flat" && cfg.texture != "checker")
    throw InputError("generate_scene: unknown texture '" + cfg.texture + "'");

  Rng rng(seed_mix(seed, 0x7363656eull));
  const int h = cfg.height, w = cfg.width;
  const float margin = 1.0f;  // background ring stays visible at the borders

  SceneSample out;
  out.seed = seed;
  out.image = Tensor<float>::zeros({h, w, 3});
  out.mask = Tensor<float>::zeros({h, w});
  for (int i = 0; i < h * w; ++i)
    for (int c = 0; c < 3; ++c) out.image.data[static_cast<size_t>(i) * 3 + c] = cfg.background[static_cast<size_t>(c)];

  const int count = cfg.min_objects + static_cast<int>(rng.uniform_int(
                        static_cast<uint64_t>(cfg.max_objects - cfg.min_objects + 1)));

  std::vector<ObjectMeta> placed;
  for (int obj = 0; obj < count; ++obj) {
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      ObjectMeta m;
      m.shape = cfg.shapes[rng.uniform_int(cfg.shapes.size())];
      m.texture = cfg.texture;
      m.size = static_cast<float>(rng.uniform(cfg.min_size, cfg.max_size));
      m.color = cfg.palette[rng.uniform_int(cfg.palette.size())];
      m.checker_phase = cfg.texture == "checker" ? static_cast<int>(rng.uniform_int(2)) : 0;
      const float lox = margin + m.size, hix = static_cast<float>(w - 1) - margin - m.size;
      const float loy = margin + m.size, hiy = static_cast<float>(h - 1) - margin - m.size;
      if (lox > hix || loy > hiy) continue;  // too large for the canvas, resample
      m.cx = static_cast<float>(rng.uniform(lox, hix));
      m.cy = static_cast<float>(rng.uniform(loy, hiy));
      placed.push_back(m);
      ok = true;
    }
    if (!ok) throw Error("generate_scene: placement failed after 100 attempts");
  }

  // Rasterize in order; later objects occlude earlier ones.
  for (size_t k = 0; k < placed.size(); ++k) {
    const ObjectMeta& m = placed[k];
    const int x0 = std::max(0, static_cast<int>(std::floor(m.cx - m.size)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(m.cx + m.size)));
    const int y0 = std::max(0, static_cast<int>(std::floor(m.cy - m.size)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(m.cy + m.size)));
    for (int py = y0; py <= y1; ++py)
      for (int px = x0; px <= x1; ++px) {
        if (!inside_shape(m, static_cast<float>(px), static_cast<float>(py))) continue;
        const auto rgb = texel(m, px, py);
        const size_t pix = static_cast<size_t>(py) * w + px;
        for (int c = 0; c < 3; ++c) out.image.data[pix * 3 + c] = rgb[static_cast<size_t>(c)];
        out.mask.data[pix] = static_cast<float>(k + 1);
      }
  }

  // Drop fully occluded objects and renumber ids consecutively.
  std::vector<int> pixels(placed.size(), 0);
  for (const float v : out.mask.data)
    if (v > 0) ++pixels[static_cast<size_t>(v) - 1];
  std::vector<int> new_id(placed.size(), 0);
  int next = 1;
  for (size_t k = 0; k < placed.size(); ++k) {
    if (pixels[k] > 0) {
      new_id[k] = next++;
      out.meta.push_back(placed[k]);
    }
  }
  for (float& v : out.mask.data)
    if (v > 0) v = static_cast<float>(new_id[static_cast<size_t>(v) - 1]);
  out.objects = next - 1;
  return out;
}

std::vector<int> mask_labels(const SceneSample& s) {
  std::vector<int> out(s.mask.data.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(s.mask.data[i]);
  return out;
}

std::vector<std::array<float, 3>> train_palette() {
  return {{0.90f, 0.12f, 0.14f}, {0.16f, 0.72f, 0.22f}, {0.18f, 0.32f, 0.90f},
          {0.95f, 0.85f, 0.12f}, {0.88f, 0.16f, 0.82f}, {0.12f, 0.80f, 0.84f}};
}

std::vector<std::array<float, 3>> shifted_palette() {
  return {{0.97f, 0.55f, 0.10f}, {0.55f, 0.18f, 0.78f}, {0.45f, 0.62f, 0.12f},
          {0.80f, 0.44f, 0.38f}, {0.35f, 0.50f, 0.55f}, {0.92f, 0.75f, 0.58f}};
}

}  // namespace slottta
