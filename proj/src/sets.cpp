#include "zonolip/sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "zonolip/error.hpp"

namespace zonolip {

Hyperbox::Hyperbox(Vector center, Vector radius)
    : center_(std::move(center)), radius_(std::move(radius)) {
  require_dim(center_.size() == radius_.size(),
              "Hyperbox: center and radius lengths differ");
  for (Eigen::Index i = 0; i < radius_.size(); ++i) {
    if (!(radius_(i) >= 0.0)) {
      throw std::invalid_argument("Hyperbox: radius must be nonnegative, got " +
                                  std::to_string(radius_(i)));
    }
  }
}

Hyperbox Hyperbox::from_bounds(const Vector& lower, const Vector& upper) {
  require_dim(lower.size() == upper.size(), "Hyperbox: bound lengths differ");
  Vector r = 0.5 * (upper - lower);
  // Rounding can produce -0 or a tiny negative value for point intervals.
  r = r.cwiseMax(0.0);
  return Hyperbox(0.5 * (upper + lower), r);
}

Hyperbox Hyperbox::point(const Vector& p) {
  return Hyperbox(p, Vector::Zero(p.size()));
}

bool Hyperbox::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) return false;
  if (dim() == 0) return true;
  return ((x - center_).cwiseAbs() - radius_).maxCoeff() <= tol;
}

Zonotope::Zonotope(Vector center, Matrix generators)
    : center_(std::move(center)), generators_(std::move(generators)) {
  if (generators_.cols() == 0) generators_.resize(center_.size(), 0);
  require_dim(generators_.rows() == center_.size(),
              "Zonotope: generator rows " + std::to_string(generators_.rows()) +
                  " != center length " + std::to_string(center_.size()));
}

Zonotope Zonotope::point(const Vector& p) {
  return Zonotope(p, Matrix(p.size(), 0));
}

Zonotope Zonotope::from_box(const Hyperbox& h) {
  return Zonotope(h.center(), h.radius().asDiagonal().toDenseMatrix());
}

Vector Zonotope::eval(const Vector& y) const {
  require_dim(y.size() == num_generators(), "Zonotope::eval: coefficient length");
  return center_ + generators_ * y;
}

double box_linmax(const Hyperbox& h, const Vector& a) {
  require_dim(a.size() == h.dim(), "box_linmax: objective length");
  return a.dot(h.center()) + a.cwiseProduct(h.radius()).lpNorm<1>();
}

LinMaxResult zono_linmax(const Zonotope& z, const Vector& a) {
  require_dim(a.size() == z.dim(), "zono_linmax: objective length");
  const Vector g = z.generators().transpose() * a;
  LinMaxResult out;
  out.value = a.dot(z.center());
  out.witness.resize(static_cast<std::size_t>(g.size()));
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    out.value += std::abs(g(j));
    out.witness[static_cast<std::size_t>(j)] = g(j) < 0.0 ? -1 : 1;
  }
  return out;
}

Hyperbox zono_interval_hull(const Zonotope& z) {
  Vector r = Vector::Zero(z.dim());
  const Matrix& e = z.generators();
  // Column order is fixed so the reduction is reproducible.
  for (Eigen::Index j = 0; j < e.cols(); ++j) r += e.col(j).cwiseAbs();
  return Hyperbox(z.center(), r);
}

Zonotope affine_map_zono(const Matrix& w, const Vector& b, const Zonotope& z) {
  require_dim(w.cols() == z.dim(), "affine_map_zono: weight columns != set dim");
  require_dim(b.size() == w.rows(), "affine_map_zono: bias length");
  return Zonotope(w * z.center() + b, w * z.generators());
}

Hyperbox affine_map_box(const Matrix& w, const Vector& b, const Hyperbox& h) {
  require_dim(w.cols() == h.dim(), "affine_map_box: weight columns != set dim");
  require_dim(b.size() == w.rows(), "affine_map_box: bias length");
  return Hyperbox(w * h.center() + b, w.cwiseAbs() * h.radius());
}

Zonotope minkowski_sum(const Zonotope& z1, const Zonotope& z2) {
  require_dim(z1.dim() == z2.dim(), "minkowski_sum: dimensions differ");
  Matrix e(z1.dim(), z1.num_generators() + z2.num_generators());
  e << z1.generators(), z2.generators();
  return Zonotope(z1.center() + z2.center(), std::move(e));
}

Zonotope hadamard_scale_zono(const Vector& lam, const Zonotope& z) {
  require_dim(lam.size() == z.dim(), "hadamard_scale_zono: scale length");
  return Zonotope(lam.cwiseProduct(z.center()), lam.asDiagonal() * z.generators());
}

Zonotope reduce_generators(const Zonotope& z, std::size_t budget) {
  if (budget < 1) throw std::invalid_argument("reduce_generators: budget must be >= 1");
  const auto m = static_cast<std::size_t>(z.num_generators());
  const auto d = static_cast<std::size_t>(z.dim());
  if (m <= budget) return z;

  const std::size_t collapse = std::min(m, m - budget + d);
  std::vector<double> norms(m);
  for (std::size_t j = 0; j < m; ++j) {
    norms[j] = z.generators().col(static_cast<Eigen::Index>(j)).lpNorm<1>();
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });

  std::vector<bool> collapsed(m, false);
  for (std::size_t k = 0; k < collapse; ++k) collapsed[order[k]] = true;

  Vector box_radius = Vector::Zero(z.dim());
  std::vector<Eigen::Index> kept;
  for (std::size_t j = 0; j < m; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    if (collapsed[j]) {
      box_radius += z.generators().col(col).cwiseAbs();
    } else {
      kept.push_back(col);
    }
  }
  std::vector<Eigen::Index> box_rows;
  for (Eigen::Index i = 0; i < z.dim(); ++i) {
    if (box_radius(i) > 0.0) box_rows.push_back(i);
  }

  Matrix e = Matrix::Zero(z.dim(), static_cast<Eigen::Index>(kept.size() + box_rows.size()));
  Eigen::Index out = 0;
  for (Eigen::Index col : kept) e.col(out++) = z.generators().col(col);
  for (Eigen::Index row : box_rows) e(row, out++) = box_radius(row);
  return Zonotope(z.center(), std::move(e));
}

Zonotope prune_zero_generators(const Zonotope& z) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < z.num_generators(); ++j) {
    if (!z.generators().col(j).isZero(0.0)) keep.push_back(j);
  }
  Matrix e(z.dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    e.col(static_cast<Eigen::Index>(k)) = z.generators().col(keep[k]);
  }
  return Zonotope(z.center(), std::move(e));
}

}  // namespace zonolip
