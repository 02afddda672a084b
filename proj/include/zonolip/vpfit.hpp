#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "zonolip/activation.hpp"

namespace zonolip {

// Scalar operators the parallelogram fitter knows how to hull.
enum class ScalarOp { kRelu, kAbs, kTanh, kSigmoid };

ScalarOp to_scalar_op(Activation a);
std::string_view scalar_op_name(ScalarOp op);
std::optional<ScalarOp> parse_scalar_op(std::string_view name);

double scalar_eval(ScalarOp op, double x);
double scalar_derivative(ScalarOp op, double x);

// Vertical parallelogram {(z, y) : |y - (slope z + intercept)| <= half_altitude}
// over a source interval. The band has total height 2 * half_altitude.
struct VPFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_altitude = 0.0;
};

// z in [lz, uz] multiplied by x in [lx, ux].
struct MulBounds {
  double lz = 0.0;
  double uz = 0.0;
  double lx = 0.0;
  double ux = 0.0;
};

inline constexpr double kRootTolerance = 1e-12;
inline constexpr int kRootMaxIterations = 200;

VPFit vp_fit_relu(double l, double u);
VPFit vp_fit_abs(double l, double u);

// op must be kTanh or kSigmoid.
VPFit vp_fit_sshaped(ScalarOp op, double l, double u);

VPFit vp_fit_mul(const MulBounds& b);

// Dispatches to the operator-specific fit.
VPFit vp_fit(ScalarOp op, double l, double u);

// One piece of a convex or concave hull of {(x, f(x)) : x in [l, u]}.
struct HullSegment {
  enum class Kind { kSecant, kFunction };
  Kind kind = Kind::kSecant;
  double x0 = 0.0;
  double x1 = 0.0;
  // Endpoint values; only meaningful for secants.
  double y0 = 0.0;
  double y1 = 0.0;

  double slope() const { return (y1 - y0) / (x1 - x0); }
};

class PiecewiseHull {
 public:
  // is_upper selects the concave (upper) or convex (lower) envelope; it
  // fixes the one-sided slopes reported outside [l, u].
  PiecewiseHull(ScalarOp op, std::vector<HullSegment> segments, bool is_upper);

  ScalarOp op() const { return op_; }
  bool is_upper() const { return is_upper_; }
  const std::vector<HullSegment>& segments() const { return segments_; }
  // Segment boundaries, ascending, starting at l and ending at u.
  std::vector<double> breakpoints() const;

  double lower_end() const { return segments_.front().x0; }
  double upper_end() const { return segments_.back().x1; }

  double eval(double x) const;
  // One-sided derivatives. Outside the domain they are +-infinity, so they
  // never constrain a subgradient intersection at the interval ends.
  double slope_left(double x) const;
  double slope_right(double x) const;

 private:
  double segment_value(const HullSegment& s, double x) const;
  double segment_slope(const HullSegment& s, double x) const;

  ScalarOp op_;
  std::vector<HullSegment> segments_;
  bool is_upper_;
};

// Concave upper envelope by secant sweep; f must be convex left of 0 and
// concave right of it (tanh, sigmoid) or convex everywhere (relu, abs).
PiecewiseHull upper_hull_giftwrap(ScalarOp op, double l, double u);
// Convex lower envelope, same operator family.
PiecewiseHull lower_hull_giftwrap(ScalarOp op, double l, double u);

// Maximum over an evenly spaced grid of |y - (slope z + intercept)| - half_altitude.
// A sound fit returns a value <= tolerance.
double vp_verify(const VPFit& fit, ScalarOp op, double l, double u, int grid_n);
// Same over the grid_n x grid_n lattice of (z, x) products.
double vp_verify_mul(const VPFit& fit, const MulBounds& b, int grid_n);

}  // namespace zonolip
