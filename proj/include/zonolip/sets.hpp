#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace zonolip {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Axis-aligned box H(c, r) = {c + r .* y : |y|_inf <= 1}.
class Hyperbox {
 public:
  Hyperbox() = default;
  Hyperbox(Vector center, Vector radius);

  static Hyperbox from_bounds(const Vector& lower, const Vector& upper);
  static Hyperbox point(const Vector& p);

  const Vector& center() const { return center_; }
  const Vector& radius() const { return radius_; }
  Eigen::Index dim() const { return center_.size(); }

  Vector lower() const { return center_ - radius_; }
  Vector upper() const { return center_ + radius_; }

  bool contains(const Vector& x, double tol = 0.0) const;

 private:
  Vector center_;
  Vector radius_;
};

// Zonotope Z(c, E) = {c + E y : |y|_inf <= 1}, generators stored as a dense
// d x m matrix. Zero columns are kept until prune_zero_generators is called.
class Zonotope {
 public:
  Zonotope() = default;
  Zonotope(Vector center, Matrix generators);

  static Zonotope point(const Vector& p);
  static Zonotope from_box(const Hyperbox& h);

  const Vector& center() const { return center_; }
  const Matrix& generators() const { return generators_; }
  Eigen::Index dim() const { return center_.size(); }
  Eigen::Index num_generators() const { return generators_.cols(); }

  // c + E y for a coefficient vector y of length m.
  Vector eval(const Vector& y) const;

 private:
  Vector center_;
  Matrix generators_;
};

struct LinMaxResult {
  double value = 0.0;
  // Maximizing coefficient vector in {-1,+1}^m; empty for hyperboxes.
  std::vector<int> witness;
};

double box_linmax(const Hyperbox& h, const Vector& a);
LinMaxResult zono_linmax(const Zonotope& z, const Vector& a);

Hyperbox zono_interval_hull(const Zonotope& z);

Zonotope affine_map_zono(const Matrix& w, const Vector& b, const Zonotope& z);
Hyperbox affine_map_box(const Matrix& w, const Vector& b, const Hyperbox& h);

Zonotope minkowski_sum(const Zonotope& z1, const Zonotope& z2);

// Z(lam .* c, diag(lam) E).
Zonotope hadamard_scale_zono(const Vector& lam, const Zonotope& z);

// Sound order reduction: the smallest-l1 generator columns are replaced by
// their interval hull so that at most `budget` columns remain (when
// budget >= dim). Ties in the ranking go to the lower column index.
Zonotope reduce_generators(const Zonotope& z, std::size_t budget);

// Drops exactly-zero generator columns.
Zonotope prune_zero_generators(const Zonotope& z);

}  // namespace zonolip
