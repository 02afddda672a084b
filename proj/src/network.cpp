#include "zonolip/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "zonolip/error.hpp"

namespace zonolip {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct ForwardRecord {
  // Pre-activation input of every nonlinear layer, in layer order.
  std::vector<Vector> pre_activations;
  Vector output;
};

ForwardRecord run_forward(const Network& net, const Vector& x) {
  require_dim(x.size() == net.input_dim(), "network input has length " +
                                               std::to_string(x.size()) + ", expected " +
                                               std::to_string(net.input_dim()));
  ForwardRecord rec;
  Vector h = x;
  for (const Layer& layer : net.layers()) {
    std::visit(Overloaded{
                   [&](const AffineLayer& a) { h = a.weight * h + a.bias; },
                   [&](const NonlinLayer& n) {
                     rec.pre_activations.push_back(h);
                     h = h.unaryExpr([&](double v) { return activate(n.kind, v); });
                   },
               },
               layer);
  }
  rec.output = std::move(h);
  return rec;
}

Vector derivative_of(Activation a, const Vector& pre) {
  return pre.unaryExpr([&](double v) { return activation_derivative(a, v); });
}

double sign_objective(const Matrix& jac, const Vector& u) {
  return (jac.transpose() * u).lpNorm<1>();
}

Vector signs_of(const Vector& v) {
  return v.unaryExpr([](double t) { return t < 0.0 ? -1.0 : 1.0; });
}

}  // namespace

Network::Network(Eigen::Index input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), output_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ <= 0) {
    throw ModelError(ModelErrorCode::kDimensionChain, "network input dimension must be positive");
  }
  widths_.push_back(input_dim_);
  Eigen::Index cur = input_dim_;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (const auto* a = std::get_if<AffineLayer>(&layers_[k])) {
      if (a->weight.cols() != cur || a->bias.size() != a->weight.rows() || a->weight.rows() == 0) {
        throw ModelError(ModelErrorCode::kDimensionChain,
                         "layer " + std::to_string(k) + ": weight is " +
                             std::to_string(a->weight.rows()) + "x" +
                             std::to_string(a->weight.cols()) + " with bias " +
                             std::to_string(a->bias.size()) + ", incoming width " +
                             std::to_string(cur));
      }
      if (!a->weight.allFinite() || !a->bias.allFinite()) {
        throw ModelError(ModelErrorCode::kNonFinite,
                         "layer " + std::to_string(k) + ": non-finite weight or bias");
      }
      cur = a->weight.rows();
    }
    widths_.push_back(cur);
  }
  output_dim_ = cur;
}

Vector eval_network(const Network& net, const Vector& x) { return run_forward(net, x).output; }

VJPResult vjp(const Network& net, const Vector& x, const Vector& u) {
  require_dim(u.size() == net.output_dim(), "vjp: cotangent length " + std::to_string(u.size()) +
                                                ", expected " +
                                                std::to_string(net.output_dim()));
  const ForwardRecord rec = run_forward(net, x);
  VJPResult out;
  out.jacobian_diagonals.resize(rec.pre_activations.size());
  Vector g = u;
  std::size_t nonlin = rec.pre_activations.size();
  for (auto it = net.layers().rbegin(); it != net.layers().rend(); ++it) {
    std::visit(Overloaded{
                   [&](const AffineLayer& a) { g = a.weight.transpose() * g; },
                   [&](const NonlinLayer& n) {
                     --nonlin;
                     Vector d = derivative_of(n.kind, rec.pre_activations[nonlin]);
                     g = g.cwiseProduct(d);
                     out.jacobian_diagonals[nonlin] = std::move(d);
                   },
               },
               *it);
  }
  out.gradient = std::move(g);
  return out;
}

Matrix jacobian(const Network& net, const Vector& x) {
  const ForwardRecord rec = run_forward(net, x);
  // Rows are cotangents; start from the identity on the output.
  Matrix g = Matrix::Identity(net.output_dim(), net.output_dim());
  std::size_t nonlin = rec.pre_activations.size();
  for (auto it = net.layers().rbegin(); it != net.layers().rend(); ++it) {
    std::visit(Overloaded{
                   [&](const AffineLayer& a) { g = g * a.weight; },
                   [&](const NonlinLayer& n) {
                     --nonlin;
                     g = g * derivative_of(n.kind, rec.pre_activations[nonlin]).asDiagonal();
                   },
               },
               *it);
  }
  return g;
}

double best_sign_objective(const Matrix& jac, Rng& rng) {
  const Eigen::Index n = jac.rows();
  if (n == 0) return 0.0;
  if (n <= kExhaustiveSignLimit) {
    // u and -u give the same objective, so u(0) stays +1. Gray-code order
    // flips one sign per step and updates J^T u incrementally.
    Vector u = Vector::Ones(n);
    Vector v = jac.transpose() * u;
    double best = v.lpNorm<1>();
    const std::uint64_t count = std::uint64_t{1} << (n - 1);
    for (std::uint64_t step = 1; step < count; ++step) {
      const auto bit = static_cast<Eigen::Index>(std::countr_zero(step)) + 1;
      v -= (2.0 * u(bit)) * jac.row(bit).transpose();
      u(bit) = -u(bit);
      best = std::max(best, v.lpNorm<1>());
    }
    return best;
  }
  constexpr int kStarts = 4;
  constexpr int kMaxSweeps = 50;
  double best = 0.0;
  for (int s = 0; s < kStarts; ++s) {
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = rng.sign();
    double value = sign_objective(jac, u);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      const Vector v = signs_of(jac.transpose() * u);
      const Vector next = signs_of(jac * v);
      const double next_value = sign_objective(jac, next);
      if (next_value <= value) break;
      u = next;
      value = next_value;
    }
    best = std::max(best, value);
  }
  return best;
}

double sampled_lower_bound(const Network& net, const Hyperbox& region, int n,
                           std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sampled_lower_bound: n must be >= 1");
  require_dim(region.dim() == net.input_dim(), "sampled_lower_bound: region dimension");
  Rng rng(seed);
  const Vector lo = region.lower();
  const Vector hi = region.upper();
  double best = 0.0;
  Vector x(net.input_dim());
  for (int k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(lo(i), hi(i));
    best = std::max(best, best_sign_objective(jacobian(net, x), rng));
  }
  return best;
}

Network gen_random_net(const RandomNetSpec& spec, std::uint64_t seed) {
  if (spec.widths.size() < 2) {
    throw std::invalid_argument("gen_random_net: need at least input and output widths");
  }
  for (int w : spec.widths) {
    if (w <= 0) throw std::invalid_argument("gen_random_net: widths must be positive");
  }
  if (!(spec.weight_scale >= 0.0) || !std::isfinite(spec.weight_scale)) {
    throw std::invalid_argument("gen_random_net: weight scale must be finite and >= 0");
  }
  Rng rng(seed);
  const double s = spec.weight_scale;
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < spec.widths.size(); ++k) {
    const int rows = spec.widths[k + 1];
    const int cols = spec.widths[k];
    AffineLayer a{Matrix(rows, cols), Vector(rows)};
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) a.weight(r, c) = rng.uniform(-s, s);
    }
    for (int r = 0; r < rows; ++r) a.bias(r) = rng.uniform(-s, s);
    layers.emplace_back(std::move(a));
    if (k + 2 < spec.widths.size()) layers.emplace_back(NonlinLayer{spec.activation});
  }
  if (spec.output_activation) layers.emplace_back(NonlinLayer{*spec.output_activation});
  return Network(spec.widths.front(), std::move(layers));
}

}  // namespace zonolip
