#pragma once

#include <vector>

#include "zonolip/network.hpp"

namespace zonolip {

// 2-D convolution (or transpose convolution) over a (C, H, W) tensor
// flattened channel-major, then row, then column.
//
// Kernel layout follows the usual deep-learning convention:
//   conv:      [out_channels][in_channels][kernel_h][kernel_w]
//   transpose: [in_channels][out_channels][kernel_h][kernel_w]
// so a transpose convolution sharing a conv's kernel realizes its adjoint.
struct ConvSpec {
  int in_channels = 1;
  int in_height = 1;
  int in_width = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  bool transpose = false;
  std::vector<double> weights;
  // One entry per output channel; empty means zero bias.
  std::vector<double> bias;

  int out_height() const;
  int out_width() const;
  int in_dim() const { return in_channels * in_height * in_width; }
  int out_dim() const { return out_channels * out_height() * out_width(); }
  std::size_t kernel_size() const {
    return static_cast<std::size_t>(in_channels) * out_channels * kernel_h * kernel_w;
  }

  // Throws DimensionError on inconsistent shape arithmetic or blob sizes.
  void validate() const;
};

// Dense (out_dim x in_dim) matrix plus bias reproducing the convolution.
AffineLayer lower_conv(const ConvSpec& spec);

}  // namespace zonolip
