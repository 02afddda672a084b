#include "zonolip/conv.hpp"

#include <string>

#include "zonolip/error.hpp"

namespace zonolip {

int ConvSpec::out_height() const {
  if (transpose) return (in_height - 1) * stride - 2 * padding + kernel_h;
  return (in_height + 2 * padding - kernel_h) / stride + 1;
}

int ConvSpec::out_width() const {
  if (transpose) return (in_width - 1) * stride - 2 * padding + kernel_w;
  return (in_width + 2 * padding - kernel_w) / stride + 1;
}

void ConvSpec::validate() const {
  if (in_channels <= 0 || in_height <= 0 || in_width <= 0 || out_channels <= 0 ||
      kernel_h <= 0 || kernel_w <= 0 || stride <= 0 || padding < 0) {
    throw DimensionError("conv: shape fields must be positive (padding nonnegative)");
  }
  if (!transpose && (in_height + 2 * padding < kernel_h || in_width + 2 * padding < kernel_w)) {
    throw DimensionError("conv: kernel larger than padded input");
  }
  if (out_height() <= 0 || out_width() <= 0) {
    throw DimensionError("conv: empty output shape");
  }
  if (weights.size() != kernel_size()) {
    throw DimensionError("conv: kernel has " + std::to_string(weights.size()) +
                         " entries, expected " + std::to_string(kernel_size()));
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_channels)) {
    throw DimensionError("conv: bias must have one entry per output channel");
  }
}

AffineLayer lower_conv(const ConvSpec& spec) {
  spec.validate();
  const int oh = spec.out_height();
  const int ow = spec.out_width();
  const int ih = spec.in_height;
  const int iw = spec.in_width;
  AffineLayer out{Matrix::Zero(spec.out_dim(), spec.in_dim()), Vector::Zero(spec.out_dim())};

  auto in_index = [&](int c, int y, int x) { return (c * ih + y) * iw + x; };
  auto out_index = [&](int c, int y, int x) { return (c * oh + y) * ow + x; };

  for (int ky = 0; ky < spec.kernel_h; ++ky) {
    for (int kx = 0; kx < spec.kernel_w; ++kx) {
      for (int ci = 0; ci < spec.in_channels; ++ci) {
        for (int co = 0; co < spec.out_channels; ++co) {
          if (!spec.transpose) {
            const double w =
                spec.weights[((static_cast<std::size_t>(co) * spec.in_channels + ci) *
                                  spec.kernel_h + ky) * spec.kernel_w + kx];
            for (int oy = 0; oy < oh; ++oy) {
              const int y = oy * spec.stride - spec.padding + ky;
              if (y < 0 || y >= ih) continue;
              for (int ox = 0; ox < ow; ++ox) {
                const int x = ox * spec.stride - spec.padding + kx;
                if (x < 0 || x >= iw) continue;
                out.weight(out_index(co, oy, ox), in_index(ci, y, x)) += w;
              }
            }
          } else {
            const double w =
                spec.weights[((static_cast<std::size_t>(ci) * spec.out_channels + co) *
                                  spec.kernel_h + ky) * spec.kernel_w + kx];
            // Input pixel (y, x) scatters to output (y*stride - pad + ky, ...).
            for (int y = 0; y < ih; ++y) {
              const int oy = y * spec.stride - spec.padding + ky;
              if (oy < 0 || oy >= oh) continue;
              for (int x = 0; x < iw; ++x) {
                const int ox = x * spec.stride - spec.padding + kx;
                if (ox < 0 || ox >= ow) continue;
                out.weight(out_index(co, oy, ox), in_index(ci, y, x)) += w;
              }
            }
          }
        }
      }
    }
  }
  if (!spec.bias.empty()) {
    for (int co = 0; co < spec.out_channels; ++co) {
      out.bias.segment(static_cast<Eigen::Index>(co) * oh * ow, oh * ow).setConstant(spec.bias[co]);
    }
  }
  return out;
}

}  // namespace zonolip
