#include "zonolip/propagate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "zonolip/error.hpp"
#include "zonolip/vpfit.hpp"

namespace zonolip {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Assembles (Lambda .* Z) + Z(b, diag(mu)) from per-coordinate fits.
Zonotope apply_fits(const std::vector<VPFit>& fits, const Zonotope& z) {
  const Eigen::Index d = z.dim();
  Vector lam(d), b(d);
  Eigen::Index extra = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    lam(i) = fits[i].slope;
    b(i) = fits[i].intercept;
    if (fits[i].half_altitude > 0.0) ++extra;
  }
  const Zonotope scaled = hadamard_scale_zono(lam, z);
  Matrix g(d, scaled.num_generators() + extra);
  g.leftCols(scaled.num_generators()) = scaled.generators();
  g.rightCols(extra).setZero();
  Eigen::Index col = scaled.num_generators();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (fits[i].half_altitude > 0.0) g(i, col++) = fits[i].half_altitude;
  }
  return Zonotope(scaled.center() + b, std::move(g));
}

Zonotope budgeted(const Zonotope& z, const GeneratorBudget& budget) {
  Zonotope out = prune_zero_generators(z);
  if (budget.unlimited) return out;
  const std::size_t cap = budget.limit(out.dim());
  if (static_cast<std::size_t>(out.num_generators()) <= cap) return out;
  return reduce_generators(out, cap);
}

}  // namespace

std::string_view set_domain_name(SetDomain d) {
  return d == SetDomain::kBox ? "box" : "zono";
}

std::optional<SetDomain> parse_set_domain(std::string_view name) {
  if (name == "box" || name == "hyperbox") return SetDomain::kBox;
  if (name == "zono" || name == "zonotope") return SetDomain::kZono;
  return std::nullopt;
}

std::string DomainChoice::label() const {
  std::string s;
  s += forward == SetDomain::kBox ? 'H' : 'Z';
  s += backward == SetDomain::kBox ? 'H' : 'Z';
  return s;
}

std::optional<DomainChoice> DomainChoice::parse(std::string_view label) {
  if (label.size() != 2) return std::nullopt;
  auto one = [](char c) -> std::optional<SetDomain> {
    if (c == 'H') return SetDomain::kBox;
    if (c == 'Z') return SetDomain::kZono;
    return std::nullopt;
  };
  auto f = one(label[0]);
  auto b = one(label[1]);
  if (!f || !b) return std::nullopt;
  return DomainChoice{*f, *b};
}

Hyperbox interval_hull(const AbstractSet& s) {
  return std::visit(Overloaded{
                        [](const Hyperbox& h) { return h; },
                        [](const Zonotope& z) { return zono_interval_hull(z); },
                    },
                    s);
}

Eigen::Index generator_count(const AbstractSet& s) {
  if (const auto* z = std::get_if<Zonotope>(&s)) return z->num_generators();
  return 0;
}

std::size_t GeneratorBudget::limit(Eigen::Index width) const {
  if (absolute) return std::max<std::size_t>(*absolute, 1);
  return std::max<std::size_t>(factor * static_cast<std::size_t>(width), 1);
}

Zonotope map_nonlin(Activation sigma, const Zonotope& z) {
  const Hyperbox hull = zono_interval_hull(z);
  const Vector lo = hull.lower();
  const Vector hi = hull.upper();
  const ScalarOp op = to_scalar_op(sigma);
  std::vector<VPFit> fits(static_cast<std::size_t>(z.dim()));
  for (Eigen::Index i = 0; i < z.dim(); ++i) fits[i] = vp_fit(op, lo(i), hi(i));
  return apply_fits(fits, z);
}

Hyperbox map_nonlin_box(Activation sigma, const Hyperbox& h) {
  const Vector lo = h.lower().unaryExpr([&](double v) { return activate(sigma, v); });
  const Vector hi = h.upper().unaryExpr([&](double v) { return activate(sigma, v); });
  return Hyperbox::from_bounds(lo, hi);
}

Hyperbox elementwise_jacobian(Activation sigma, const Hyperbox& pre) {
  const Vector l = pre.lower();
  const Vector u = pre.upper();
  Vector lo(pre.dim()), hi(pre.dim());
  for (Eigen::Index i = 0; i < pre.dim(); ++i) {
    if (sigma == Activation::kRelu) {
      lo(i) = l(i) > 0.0 ? 1.0 : 0.0;
      hi(i) = u(i) > 0.0 ? 1.0 : 0.0;
      continue;
    }
    const double far = std::max(std::abs(l(i)), std::abs(u(i)));
    const double near = (l(i) <= 0.0 && u(i) >= 0.0) ? 0.0
                                                     : std::min(std::abs(l(i)), std::abs(u(i)));
    lo(i) = activation_derivative(sigma, far);
    hi(i) = activation_derivative(sigma, near);
  }
  return Hyperbox::from_bounds(lo, hi);
}

Hyperbox elementwise_jacobian(Activation sigma, const Zonotope& pre) {
  return elementwise_jacobian(sigma, zono_interval_hull(pre));
}

Zonotope elementwise_mul_set(const Hyperbox& j, const Zonotope& y) {
  require_dim(j.dim() == y.dim(), "elementwise_mul_set: Jacobian box has dimension " +
                                      std::to_string(j.dim()) + ", set has " +
                                      std::to_string(y.dim()));
  const Hyperbox hull = zono_interval_hull(y);
  const Vector ly = hull.lower();
  const Vector uy = hull.upper();
  const Vector lj = j.lower();
  const Vector uj = j.upper();
  std::vector<VPFit> fits(static_cast<std::size_t>(y.dim()));
  for (Eigen::Index i = 0; i < y.dim(); ++i) {
    fits[i] = vp_fit_mul(MulBounds{ly(i), uy(i), lj(i), uj(i)});
  }
  return apply_fits(fits, y);
}

Hyperbox elementwise_mul_box(const Hyperbox& j, const Hyperbox& y) {
  require_dim(j.dim() == y.dim(), "elementwise_mul_box: dimension mismatch");
  const Vector lj = j.lower(), uj = j.upper(), ly = y.lower(), uy = y.upper();
  Vector lo(j.dim()), hi(j.dim());
  for (Eigen::Index i = 0; i < j.dim(); ++i) {
    const double p[4] = {lj(i) * ly(i), lj(i) * uy(i), uj(i) * ly(i), uj(i) * uy(i)};
    lo(i) = *std::min_element(p, p + 4);
    hi(i) = *std::max_element(p, p + 4);
  }
  return Hyperbox::from_bounds(lo, hi);
}

LayerTrace forward_pass(const Network& net, const Hyperbox& region, SetDomain domain,
                        const GeneratorBudget& budget) {
  require_dim(region.dim() == net.input_dim(),
              "region has dimension " + std::to_string(region.dim()) + ", network input is " +
                  std::to_string(net.input_dim()));
  LayerTrace trace;
  trace.forward.reserve(net.size() + 1);
  if (domain == SetDomain::kZono) {
    trace.forward.emplace_back(prune_zero_generators(Zonotope::from_box(region)));
  } else {
    trace.forward.emplace_back(region);
  }
  for (const Layer& layer : net.layers()) {
    const AbstractSet& cur = trace.forward.back();
    AbstractSet next = std::visit(
        Overloaded{
            [&](const AffineLayer& a) -> AbstractSet {
              if (const auto* z = std::get_if<Zonotope>(&cur)) {
                return affine_map_zono(a.weight, a.bias, *z);
              }
              return affine_map_box(a.weight, a.bias, std::get<Hyperbox>(cur));
            },
            [&](const NonlinLayer& n) -> AbstractSet {
              if (const auto* z = std::get_if<Zonotope>(&cur)) {
                trace.jacobians.push_back(elementwise_jacobian(n.kind, *z));
                return budgeted(map_nonlin(n.kind, *z), budget);
              }
              const auto& h = std::get<Hyperbox>(cur);
              trace.jacobians.push_back(elementwise_jacobian(n.kind, h));
              return map_nonlin_box(n.kind, h);
            },
        },
        layer);
    trace.forward.push_back(std::move(next));
  }
  return trace;
}

void backward_pass(const Network& net, LayerTrace& trace, SetDomain domain,
                   const GeneratorBudget& budget) {
  if (trace.forward.size() != net.size() + 1) {
    throw InvariantError("backward_pass: trace does not match network depth");
  }
  const Eigen::Index n_out = net.output_dim();
  std::vector<AbstractSet> rev;
  rev.reserve(net.size() + 1);
  if (domain == SetDomain::kZono) {
    rev.emplace_back(Zonotope(Vector::Zero(n_out), Matrix::Identity(n_out, n_out)));
  } else {
    rev.emplace_back(Hyperbox(Vector::Zero(n_out), Vector::Ones(n_out)));
  }
  std::size_t nonlin = trace.jacobians.size();
  for (auto it = net.layers().rbegin(); it != net.layers().rend(); ++it) {
    const AbstractSet& cur = rev.back();
    AbstractSet next = std::visit(
        Overloaded{
            [&](const AffineLayer& a) -> AbstractSet {
              const Vector zero = Vector::Zero(a.weight.cols());
              if (const auto* z = std::get_if<Zonotope>(&cur)) {
                return affine_map_zono(a.weight.transpose(), zero, *z);
              }
              return affine_map_box(a.weight.transpose(), zero, std::get<Hyperbox>(cur));
            },
            [&](const NonlinLayer&) -> AbstractSet {
              if (nonlin == 0) throw InvariantError("backward_pass: missing Jacobian box");
              const Hyperbox& j = trace.jacobians[--nonlin];
              if (const auto* z = std::get_if<Zonotope>(&cur)) {
                return budgeted(elementwise_mul_set(j, *z), budget);
              }
              return elementwise_mul_box(j, std::get<Hyperbox>(cur));
            },
        },
        *it);
    rev.push_back(std::move(next));
  }
  if (nonlin != 0) throw InvariantError("backward_pass: unused Jacobian boxes");
  trace.cotangents.assign(std::make_move_iterator(rev.rbegin()),
                          std::make_move_iterator(rev.rend()));
}

LipschitzReport zlip(const Network& net, const Hyperbox& region, const ZLipOptions& opts) {
  if (!region.radius().allFinite() || !region.center().allFinite()) {
    throw std::invalid_argument("zlip: region must be finite");
  }
  const auto start = std::chrono::steady_clock::now();
  LayerTrace trace = forward_pass(net, region, opts.domain.forward, opts.budget);
  backward_pass(net, trace, opts.domain.backward, opts.budget);

  LipschitzReport report;
  report.norm_method = opts.norm_method;
  report.domain = opts.domain;
  const AbstractSet& final_set = trace.cotangents.front();
  if (const auto* z = std::get_if<Zonotope>(&final_set)) {
    report.bound = l1max(prune_zero_generators(*z), opts.norm_method, opts.max_dof).value;
  } else {
    report.bound = l1max_hyperbox(std::get<Hyperbox>(final_set)).value;
  }
  for (const auto& s : trace.forward) report.forward_generators.push_back(generator_count(s));
  for (const auto& s : trace.cotangents) report.backward_generators.push_back(generator_count(s));
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!(report.bound >= 0.0) || !std::isfinite(report.bound)) {
    throw InvariantError("zlip: bound is not a finite nonnegative number");
  }
  if (opts.keep_trace) report.trace = std::move(trace);
  return report;
}

}  // namespace zonolip
