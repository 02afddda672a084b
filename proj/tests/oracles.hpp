#pragma once

// Independent reference implementations used only by the tests. They favor
// obviousness over speed and share no code with the library beyond the
// plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "zonolip/conv.hpp"
#include "zonolip/network.hpp"
#include "zonolip/rng.hpp"
#include "zonolip/sets.hpp"

namespace oracle {

using zonolip::Matrix;
using zonolip::Vector;

// Calls fn(v) for every v in {-1,+1}^n, lexicographic with -1 first.
inline void for_each_sign(int n, const std::function<void(const Vector&)>& fn) {
  Vector v(n);
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    for (int k = 0; k < n; ++k) v(k) = ((idx >> (n - 1 - k)) & 1) ? 1.0 : -1.0;
    fn(v);
  }
}

// max_{v in {-1,1}^cols} ||M v||_1.
inline double inf_to_1(const Matrix& m) {
  double best = 0.0;
  for_each_sign(static_cast<int>(m.cols()), [&](const Vector& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < m.cols(); ++j) row += m(i, j) * v(j);
      s += std::abs(row);
    }
    best = std::max(best, s);
  });
  return best;
}

// max over the 2^m vertices of ||c + E y||_1.
inline double zono_l1max(const zonolip::Zonotope& z) {
  double best = 0.0;
  for_each_sign(static_cast<int>(z.num_generators()), [&](const Vector& y) {
    best = std::max(best, (z.center() + z.generators() * y).cwiseAbs().sum());
  });
  return best;
}

// max over the 2^m vertices of a^T (c + E y).
inline double zono_linmax(const zonolip::Zonotope& z, const Vector& a) {
  double best = -INFINITY;
  for_each_sign(static_cast<int>(z.num_generators()), [&](const Vector& y) {
    best = std::max(best, a.dot(z.center() + z.generators() * y));
  });
  return best;
}

// max over the 2^d corners of a^T x.
inline double box_linmax(const zonolip::Hyperbox& h, const Vector& a) {
  double best = -INFINITY;
  for_each_sign(static_cast<int>(h.dim()), [&](const Vector& s) {
    best = std::max(best, a.dot(h.center() + h.radius().cwiseProduct(s)));
  });
  return best;
}

// Layer-by-layer evaluation with explicit loops.
inline Vector forward(const zonolip::Network& net, const Vector& x) {
  std::vector<double> h(x.data(), x.data() + x.size());
  for (const auto& layer : net.layers()) {
    if (const auto* a = std::get_if<zonolip::AffineLayer>(&layer)) {
      std::vector<double> next(static_cast<std::size_t>(a->weight.rows()));
      for (Eigen::Index i = 0; i < a->weight.rows(); ++i) {
        double s = a->bias(i);
        for (Eigen::Index j = 0; j < a->weight.cols(); ++j) s += a->weight(i, j) * h[j];
        next[i] = s;
      }
      h = std::move(next);
    } else {
      const auto kind = std::get<zonolip::NonlinLayer>(layer).kind;
      for (double& v : h) {
        switch (kind) {
          case zonolip::Activation::kRelu: v = std::max(v, 0.0); break;
          case zonolip::Activation::kTanh: v = std::tanh(v); break;
          case zonolip::Activation::kSigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
        }
      }
    }
  }
  return Eigen::Map<Vector>(h.data(), static_cast<Eigen::Index>(h.size()));
}

// Central differences of u^T f at x.
inline Vector fd_gradient(const zonolip::Network& net, const Vector& x, const Vector& u,
                          double step = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    g(i) = (u.dot(forward(net, xp)) - u.dot(forward(net, xm))) / (2.0 * step);
  }
  return g;
}

// Sliding-window convolution (gather form) on a (C, H, W) input; transpose
// convolution in gather form too: output pixel (oy, ox) collects every input
// pixel (y, x) with y * stride - padding + ky == oy.
inline std::vector<double> conv(const zonolip::ConvSpec& s, const std::vector<double>& in) {
  const int oh = s.transpose ? (s.in_height - 1) * s.stride - 2 * s.padding + s.kernel_h
                             : (s.in_height + 2 * s.padding - s.kernel_h) / s.stride + 1;
  const int ow = s.transpose ? (s.in_width - 1) * s.stride - 2 * s.padding + s.kernel_w
                             : (s.in_width + 2 * s.padding - s.kernel_w) / s.stride + 1;
  std::vector<double> out(static_cast<std::size_t>(s.out_channels) * oh * ow, 0.0);
  auto at_in = [&](int c, int y, int x) { return in[(c * s.in_height + y) * s.in_width + x]; };
  for (int co = 0; co < s.out_channels; ++co) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = s.bias.empty() ? 0.0 : s.bias[co];
        for (int ci = 0; ci < s.in_channels; ++ci) {
          for (int ky = 0; ky < s.kernel_h; ++ky) {
            for (int kx = 0; kx < s.kernel_w; ++kx) {
              int y, x;
              double w;
              if (!s.transpose) {
                y = oy * s.stride - s.padding + ky;
                x = ox * s.stride - s.padding + kx;
                w = s.weights[((co * s.in_channels + ci) * s.kernel_h + ky) * s.kernel_w + kx];
              } else {
                const int ny = oy + s.padding - ky;
                const int nx = ox + s.padding - kx;
                if (ny % s.stride != 0 || nx % s.stride != 0) continue;
                y = ny / s.stride;
                x = nx / s.stride;
                w = s.weights[((ci * s.out_channels + co) * s.kernel_h + ky) * s.kernel_w + kx];
              }
              if (y < 0 || y >= s.in_height || x < 0 || x >= s.in_width) continue;
              acc += w * at_in(ci, y, x);
            }
          }
        }
        out[(co * oh + oy) * ow + ox] = acc;
      }
    }
  }
  return out;
}

// Uniform point in the zonotope's coefficient cube.
inline Vector random_coeffs(zonolip::Rng& rng, Eigen::Index m) {
  Vector y(m);
  for (Eigen::Index i = 0; i < m; ++i) y(i) = rng.uniform(-1.0, 1.0);
  return y;
}

inline Matrix random_matrix(zonolip::Rng& rng, Eigen::Index r, Eigen::Index c, double s = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-s, s);
  return m;
}

inline Vector random_vector(zonolip::Rng& rng, Eigen::Index n, double s = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-s, s);
  return v;
}

// Smallest half-altitude over `slopes` candidate slopes in [lo, hi], each
// scored on the sampled points (xs, ys): for a fixed slope the best band is
// centered between the extreme residuals.
inline double grid_min_half_altitude(const std::vector<double>& xs, const std::vector<double>& ys,
                                     double lo, double hi, int slopes) {
  double best = INFINITY;
  for (int k = 0; k < slopes; ++k) {
    const double lam = lo + (hi - lo) * k / (slopes - 1);
    double rmin = INFINITY, rmax = -INFINITY;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - lam * xs[i];
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    best = std::min(best, 0.5 * (rmax - rmin));
  }
  return best;
}

}  // namespace oracle
