#pragma once

#include <string>

#include "slottta/ops.hpp"
#include "slottta/registry.hpp"
#include "slottta/slot_attention.hpp"

// Convolutional encoder for single-view RGB: four same-padding stride-1
// 5x5 conv layers with relu, then a learnable linear projection of the fixed
// 4-channel positional grid added to the feature map. Output is the token
// matrix M of shape (H*W) x C.
namespace slottta {

struct EncoderDims {
  int height = 48;
  int width = 48;
  int channels = 32;  // C_enc
  int conv_layers = 4;
  int ksize = 5;
};

// (x, y, 1-x, 1-y) ramps in [0,1], row-major by pixel; corners take the
// extreme values. A 1x1 grid is [0, 0, 1, 1].
template <typename T>
Tensor<T> positional_grid(int h, int w) {
  if (h < 1 || w < 1) throw InputError("positional_grid: degenerate size");
  Tensor<T> g = Tensor<T>::zeros({h * w, 4});
  for (int r = 0; r < h; ++r) {
    const T y = h == 1 ? T(0) : static_cast<T>(r) / static_cast<T>(h - 1);
    for (int c = 0; c < w; ++c) {
      const T x = w == 1 ? T(0) : static_cast<T>(c) / static_cast<T>(w - 1);
      T* row = g.data.data() + (static_cast<size_t>(r) * w + c) * 4;
      row[0] = x;
      row[1] = y;
      row[2] = T(1) - x;
      row[3] = T(1) - y;
    }
  }
  return g;
}

template <typename T>
void init_encoder_params(ParamRegistry<T>& reg, const EncoderDims& d, Rng& rng) {
  using sa_detail::glorot;
  const int k2 = d.ksize * d.ksize;
  for (int l = 0; l < d.conv_layers; ++l) {
    const int cin = l == 0 ? 3 : d.channels;
    const std::string base = "enc.conv" + std::to_string(l + 1);
    reg.add(base + ".w", ParamTag::encoder, glorot<T>(rng, k2 * cin, d.channels));
    reg.add(base + ".b", ParamTag::encoder, Tensor<T>::zeros({1, d.channels}));
  }
  reg.add("enc.pos.w", ParamTag::encoder, glorot<T>(rng, 4, d.channels));
  reg.add("enc.pos.b", ParamTag::encoder, Tensor<T>::zeros({1, d.channels}));
}

struct EncoderVars {
  std::vector<Var> conv_w, conv_b;
  Var pos_w, pos_b;
};

template <typename T>
EncoderVars bind_encoder(Tape<T>& t, const ParamRegistry<T>& reg, const EncoderDims& d) {
  EncoderVars v;
  for (int l = 0; l < d.conv_layers; ++l) {
    const std::string base = "enc.conv" + std::to_string(l + 1);
    v.conv_w.push_back(t.leaf(reg.tensor(base + ".w")));
    v.conv_b.push_back(t.leaf(reg.tensor(base + ".b")));
  }
  v.pos_w = t.leaf(reg.tensor("enc.pos.w"));
  v.pos_b = t.leaf(reg.tensor("enc.pos.b"));
  return v;
}

// Conv stack only (pre-positional features); exposed separately so the
// translation-equivariance of the stride-1 stack can be probed directly.
template <typename T>
Var encode_features(Tape<T>& t, Var image, const EncoderVars& v, const EncoderDims& d) {
  Var x = image;
  for (size_t l = 0; l < v.conv_w.size(); ++l)
    x = ops::relu(t, ops::conv2d(t, x, v.conv_w[l], v.conv_b[l], d.height, d.width, d.ksize));
  return x;
}

// image: (H*W) x 3 in [0,1]. Returns M: (H*W) x C.
template <typename T>
Var encode_image(Tape<T>& t, Var image, const EncoderVars& v, const EncoderDims& d) {
  const auto& img = t.value(image);
  if (img.rank() != 2 || img.dim(1) != 3 || img.dim(0) != d.height * d.width)
    throw ShapeError("encode_image: expected " + std::to_string(d.height * d.width) + "x3 pixels, got " +
                     shape_str(img.shape));
  if (d.height < 8 || d.width < 8) throw InputError("encode_image: image must be at least 8x8");
  if (!img.all_finite()) throw InputError("encode_image: non-finite pixel values");
  Var feats = encode_features(t, image, v, d);
  Var grid = t.constant(positional_grid<T>(d.height, d.width));
  Var pos = ops::add(t, ops::matmul(t, grid, v.pos_w), ops::tile_rows(t, v.pos_b, d.height * d.width));
  return ops::add(t, feats, pos);
}

}  // namespace slottta
