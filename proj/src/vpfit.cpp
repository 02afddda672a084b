#include "zonolip/vpfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "zonolip/error.hpp"

namespace zonolip {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_interval(double l, double u, const char* who) {
  if (!std::isfinite(l) || !std::isfinite(u)) {
    throw std::invalid_argument(std::string(who) + ": non-finite interval bound");
  }
  if (l > u) {
    throw std::invalid_argument(std::string(who) + ": lower bound exceeds upper bound");
  }
}

bool is_sshaped(ScalarOp op) { return op == ScalarOp::kTanh || op == ScalarOp::kSigmoid; }

// Rounding guard added to every non-exact fit.
double numeric_slack(const VPFit& f, double l, double u, bool used_roots) {
  const double scale =
      std::abs(f.slope) * std::max(std::abs(l), std::abs(u)) + std::abs(f.intercept) +
      f.half_altitude;
  return 16.0 * kEps * scale + (used_roots ? kRootTolerance : 0.0);
}

// Root of g on [a, b] given a sign change; bisects down to adjacent doubles.
template <class G>
double bisect(G&& g, double a, double b) {
  double ga = g(a);
  double gb = g(b);
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  if ((ga > 0.0) == (gb > 0.0)) {
    throw InvariantError("bisect: root not bracketed on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  }
  for (int it = 0; it < kRootMaxIterations; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double gm = g(m);
    if (gm == 0.0) return m;
    if ((gm > 0.0) == (ga > 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
      gb = gm;
    }
  }
  return std::abs(ga) <= std::abs(gb) ? a : b;
}

// Solves f'(x) = slope on [a, b] where f' is monotone; returns nullopt
// without a sign change.
std::optional<double> solve_derivative(ScalarOp op, double slope, double a, double b) {
  if (!(a < b)) return std::nullopt;
  auto g = [&](double x) { return scalar_derivative(op, x) - slope; };
  const double ga = g(a);
  const double gb = g(b);
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  if ((ga > 0.0) == (gb > 0.0)) return std::nullopt;
  return bisect(g, a, b);
}

double one_sided_derivative(ScalarOp op, double x, bool right) {
  if (x == 0.0) {
    if (op == ScalarOp::kRelu) return right ? 1.0 : 0.0;
    if (op == ScalarOp::kAbs) return right ? 1.0 : -1.0;
  }
  return scalar_derivative(op, x);
}

HullSegment secant(ScalarOp op, double x0, double x1) {
  return {HullSegment::Kind::kSecant, x0, x1, scalar_eval(op, x0), scalar_eval(op, x1)};
}

HullSegment function_piece(double x0, double x1) {
  return {HullSegment::Kind::kFunction, x0, x1, 0.0, 0.0};
}

// Largest |f(z) - slope z - intercept| over [l, u]; f(z) - slope z is
// extremal at the endpoints or where f' equals the slope.
double max_deviation(ScalarOp op, double slope, double intercept, double l, double u) {
  std::vector<double> pts{l, u};
  const double mid = std::clamp(0.0, l, u);
  for (auto [a, b] : {std::pair{l, mid}, std::pair{mid, u}}) {
    if (auto r = solve_derivative(op, slope, a, b)) pts.push_back(*r);
  }
  double dev = 0.0;
  for (double z : pts) {
    dev = std::max(dev, std::abs(scalar_eval(op, z) - slope * z - intercept));
  }
  return dev;
}

bool same_and_nonneg_sign(double l, double u) { return l * u >= 0.0; }

}  // namespace

ScalarOp to_scalar_op(Activation a) {
  switch (a) {
    case Activation::kRelu: return ScalarOp::kRelu;
    case Activation::kTanh: return ScalarOp::kTanh;
    case Activation::kSigmoid: return ScalarOp::kSigmoid;
  }
  throw std::invalid_argument("unknown activation");
}

std::string_view scalar_op_name(ScalarOp op) {
  switch (op) {
    case ScalarOp::kRelu: return "relu";
    case ScalarOp::kAbs: return "abs";
    case ScalarOp::kTanh: return "tanh";
    case ScalarOp::kSigmoid: return "sigmoid";
  }
  throw std::invalid_argument("unknown scalar operator");
}

std::optional<ScalarOp> parse_scalar_op(std::string_view name) {
  if (name == "relu") return ScalarOp::kRelu;
  if (name == "abs") return ScalarOp::kAbs;
  if (name == "tanh") return ScalarOp::kTanh;
  if (name == "sigmoid") return ScalarOp::kSigmoid;
  return std::nullopt;
}

double scalar_eval(ScalarOp op, double x) {
  switch (op) {
    case ScalarOp::kRelu: return activate(Activation::kRelu, x);
    case ScalarOp::kAbs: return std::abs(x);
    case ScalarOp::kTanh: return activate(Activation::kTanh, x);
    case ScalarOp::kSigmoid: return activate(Activation::kSigmoid, x);
  }
  throw std::invalid_argument("unknown scalar operator");
}

double scalar_derivative(ScalarOp op, double x) {
  switch (op) {
    case ScalarOp::kRelu: return activation_derivative(Activation::kRelu, x);
    case ScalarOp::kAbs: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    case ScalarOp::kTanh: return activation_derivative(Activation::kTanh, x);
    case ScalarOp::kSigmoid: return activation_derivative(Activation::kSigmoid, x);
  }
  throw std::invalid_argument("unknown scalar operator");
}

VPFit vp_fit_relu(double l, double u) {
  check_interval(l, u, "vp_fit_relu");
  if (u <= 0.0) return {0.0, 0.0, 0.0};
  if (l >= 0.0) return {1.0, 0.0, 0.0};
  const double w = u - l;
  VPFit fit{u / w, 0.0, -u * l / (2.0 * w)};
  fit.intercept = fit.half_altitude;
  fit.half_altitude += numeric_slack(fit, l, u, false);
  return fit;
}

VPFit vp_fit_abs(double l, double u) {
  check_interval(l, u, "vp_fit_abs");
  if (same_and_nonneg_sign(l, u)) {
    return {l >= 0.0 ? 1.0 : -1.0, 0.0, 0.0};
  }
  const double w = u - l;
  VPFit fit{(u + l) / w, 0.0, -u * l / w};
  fit.intercept = fit.half_altitude;
  fit.half_altitude += numeric_slack(fit, l, u, false);
  return fit;
}

VPFit vp_fit_sshaped(ScalarOp op, double l, double u) {
  if (!is_sshaped(op)) throw std::invalid_argument("vp_fit_sshaped: expects tanh or sigmoid");
  check_interval(l, u, "vp_fit_sshaped");
  if (l == u) {
    const double s = scalar_derivative(op, l);
    return {s, scalar_eval(op, l) - s * l, 0.0};
  }

  const PiecewiseHull upper = upper_hull_giftwrap(op, l, u);
  const PiecewiseHull lower = lower_hull_giftwrap(op, l, u);

  std::vector<double> knots = upper.breakpoints();
  for (double b : lower.breakpoints()) knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  // The altitude h+ - h- is concave; on each piece its maximizer is a knot
  // or a point where f' matches the slope of the secant side.
  std::vector<double> candidates = knots;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double p = knots[k];
    const double q = knots[k + 1];
    const double m = 0.5 * (p + q);
    auto kind_at = [m](const PiecewiseHull& h) {
      for (const auto& s : h.segments()) {
        if (m >= s.x0 && m <= s.x1) return s;
      }
      return h.segments().back();
    };
    const HullSegment up = kind_at(upper);
    const HullSegment lo = kind_at(lower);
    if (up.kind == lo.kind) continue;
    const double secant_slope = up.kind == HullSegment::Kind::kSecant ? up.slope() : lo.slope();
    if (auto r = solve_derivative(op, secant_slope, p, q)) candidates.push_back(*r);
  }

  double best_x = l;
  double best_alt = -kInf;
  std::sort(candidates.begin(), candidates.end());
  for (double x : candidates) {
    const double alt = upper.eval(x) - lower.eval(x);
    if (alt >= best_alt) {
      best_alt = alt;
      best_x = x;
    }
  }

  // Slopes admissible for both hulls at the maximizer.
  const double lo_slope =
      std::max(lower.slope_left(best_x), upper.slope_right(best_x));
  const double hi_slope =
      std::min(lower.slope_right(best_x), upper.slope_left(best_x));
  double slope;
  if (std::isfinite(lo_slope) && std::isfinite(hi_slope)) {
    slope = 0.5 * (lo_slope + hi_slope);
  } else if (std::isfinite(lo_slope)) {
    slope = lo_slope;
  } else if (std::isfinite(hi_slope)) {
    slope = hi_slope;
  } else {
    slope = (scalar_eval(op, u) - scalar_eval(op, l)) / (u - l);
  }

  const double mid = 0.5 * (upper.eval(best_x) + lower.eval(best_x));
  VPFit fit{slope, mid - slope * best_x, std::max(0.0, 0.5 * best_alt)};

  // Root-finding error in the hull shows up as a deviation larger than the
  // hull altitude; fold the measured deviation in.
  fit.half_altitude =
      std::max(fit.half_altitude, max_deviation(op, fit.slope, fit.intercept, l, u));
  fit.half_altitude += numeric_slack(fit, l, u, true);
  return fit;
}

VPFit vp_fit_mul(const MulBounds& b) {
  check_interval(b.lz, b.uz, "vp_fit_mul (z range)");
  check_interval(b.lx, b.ux, "vp_fit_mul (multiplier range)");
  if (b.lx == b.ux) return {b.lx, 0.0, 0.0};

  const double spread = b.ux - b.lx;
  // Every case has the admissible slope interval centered on the midpoint
  // multiplier, and the maximal altitude sits at the endpoint of largest |z|
  // (upper endpoint on ties).
  double slope = 0.5 * (b.lx + b.ux);
  double reach;
  double at;
  if (b.lz >= 0.0 || b.uz <= 0.0) {
    at = std::abs(b.uz) >= std::abs(b.lz) ? b.uz : b.lz;
    reach = std::abs(at);
  } else {
    const double w = b.uz - b.lz;
    const double lo = (b.lx * b.uz - b.ux * b.lz) / w;
    const double hi = (b.ux * b.uz - b.lx * b.lz) / w;
    slope = 0.5 * (lo + hi);
    at = b.uz >= -b.lz ? b.uz : b.lz;
    reach = std::abs(at);
  }
  VPFit fit{slope, 0.0, 0.5 * spread * reach};
  // Center line passes through ((lx+ux)/2 * at) at the maximizing endpoint.
  fit.intercept = 0.5 * (b.lx + b.ux) * at - slope * at;
  if (fit.half_altitude > 0.0) {
    fit.half_altitude += numeric_slack(fit, b.lz, b.uz, false) +
                         16.0 * kEps * std::max(std::abs(b.lx), std::abs(b.ux)) * reach;
  }
  return fit;
}

VPFit vp_fit(ScalarOp op, double l, double u) {
  switch (op) {
    case ScalarOp::kRelu: return vp_fit_relu(l, u);
    case ScalarOp::kAbs: return vp_fit_abs(l, u);
    case ScalarOp::kTanh:
    case ScalarOp::kSigmoid: return vp_fit_sshaped(op, l, u);
  }
  throw std::invalid_argument("vp_fit: unsupported operator");
}

PiecewiseHull::PiecewiseHull(ScalarOp op, std::vector<HullSegment> segments, bool is_upper)
    : op_(op), segments_(std::move(segments)), is_upper_(is_upper) {
  if (segments_.empty()) throw std::invalid_argument("PiecewiseHull: no segments");
}

std::vector<double> PiecewiseHull::breakpoints() const {
  std::vector<double> b{segments_.front().x0};
  for (const auto& s : segments_) b.push_back(s.x1);
  return b;
}

double PiecewiseHull::segment_value(const HullSegment& s, double x) const {
  if (s.kind == HullSegment::Kind::kFunction || s.x1 == s.x0) return scalar_eval(op_, x);
  return s.y0 + (s.y1 - s.y0) * ((x - s.x0) / (s.x1 - s.x0));
}

double PiecewiseHull::segment_slope(const HullSegment& s, double x) const {
  if (s.kind == HullSegment::Kind::kSecant && s.x1 > s.x0) return s.slope();
  return scalar_derivative(op_, x);
}

double PiecewiseHull::eval(double x) const {
  for (const auto& s : segments_) {
    if (x <= s.x1) return segment_value(s, x);
  }
  return segment_value(segments_.back(), x);
}

double PiecewiseHull::slope_left(double x) const {
  if (x <= lower_end()) return is_upper_ ? kInf : -kInf;
  for (const auto& s : segments_) {
    if (x > s.x0 && x <= s.x1) {
      if (s.kind == HullSegment::Kind::kFunction) return one_sided_derivative(op_, x, false);
      return segment_slope(s, x);
    }
  }
  return segment_slope(segments_.back(), x);
}

double PiecewiseHull::slope_right(double x) const {
  if (x >= upper_end()) return is_upper_ ? -kInf : kInf;
  for (const auto& s : segments_) {
    if (x >= s.x0 && x < s.x1) {
      if (s.kind == HullSegment::Kind::kFunction) return one_sided_derivative(op_, x, true);
      return segment_slope(s, x);
    }
  }
  return segment_slope(segments_.front(), x);
}

PiecewiseHull upper_hull_giftwrap(ScalarOp op, double l, double u) {
  check_interval(l, u, "upper_hull_giftwrap");
  if (l == u) return PiecewiseHull(op, {function_piece(l, u)}, true);
  switch (op) {
    case ScalarOp::kRelu:
    case ScalarOp::kAbs:
      return PiecewiseHull(op, {secant(op, l, u)}, true);
    case ScalarOp::kTanh:
    case ScalarOp::kSigmoid:
      break;
    default:
      throw std::invalid_argument("upper_hull_giftwrap: unsupported operator");
  }
  if (u <= 0.0) return PiecewiseHull(op, {secant(op, l, u)}, true);
  if (l >= 0.0) return PiecewiseHull(op, {function_piece(l, u)}, true);

  // Tangent from (l, f(l)) to the concave side: f'(x)(x - l) = f(x) - f(l).
  const double fl = scalar_eval(op, l);
  auto residual = [&](double x) {
    return scalar_derivative(op, x) * (x - l) - (scalar_eval(op, x) - fl);
  };
  if (residual(u) >= 0.0) return PiecewiseHull(op, {secant(op, l, u)}, true);
  const double tangent = residual(0.0) <= 0.0 ? 0.0 : bisect(residual, 0.0, u);
  return PiecewiseHull(op, {secant(op, l, tangent), function_piece(tangent, u)}, true);
}

PiecewiseHull lower_hull_giftwrap(ScalarOp op, double l, double u) {
  check_interval(l, u, "lower_hull_giftwrap");
  if (l == u) return PiecewiseHull(op, {function_piece(l, u)}, false);
  switch (op) {
    case ScalarOp::kRelu:
    case ScalarOp::kAbs:
      return PiecewiseHull(op, {function_piece(l, u)}, false);
    case ScalarOp::kTanh:
    case ScalarOp::kSigmoid:
      break;
    default:
      throw std::invalid_argument("lower_hull_giftwrap: unsupported operator");
  }
  if (u <= 0.0) return PiecewiseHull(op, {function_piece(l, u)}, false);
  if (l >= 0.0) return PiecewiseHull(op, {secant(op, l, u)}, false);

  // Tangent from (u, f(u)) to the convex side: f(u) - f(x) = f'(x)(u - x).
  const double fu = scalar_eval(op, u);
  auto residual = [&](double x) {
    return (fu - scalar_eval(op, x)) - scalar_derivative(op, x) * (u - x);
  };
  if (residual(l) <= 0.0) return PiecewiseHull(op, {secant(op, l, u)}, false);
  const double tangent = residual(0.0) >= 0.0 ? 0.0 : bisect(residual, l, 0.0);
  return PiecewiseHull(op, {function_piece(l, tangent), secant(op, tangent, u)}, false);
}

double vp_verify(const VPFit& fit, ScalarOp op, double l, double u, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("vp_verify: grid_n must be >= 2");
  double worst = -kInf;
  for (int k = 0; k < grid_n; ++k) {
    const double t = static_cast<double>(k) / (grid_n - 1);
    const double z = k == grid_n - 1 ? u : l + (u - l) * t;
    const double dev = std::abs(scalar_eval(op, z) - (fit.slope * z + fit.intercept));
    worst = std::max(worst, dev - fit.half_altitude);
  }
  return worst;
}

double vp_verify_mul(const VPFit& fit, const MulBounds& b, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("vp_verify_mul: grid_n must be >= 2");
  double worst = -kInf;
  for (int i = 0; i < grid_n; ++i) {
    const double ti = static_cast<double>(i) / (grid_n - 1);
    const double z = i == grid_n - 1 ? b.uz : b.lz + (b.uz - b.lz) * ti;
    const double center = fit.slope * z + fit.intercept;
    for (int j = 0; j < grid_n; ++j) {
      const double tj = static_cast<double>(j) / (grid_n - 1);
      const double x = j == grid_n - 1 ? b.ux : b.lx + (b.ux - b.lx) * tj;
      worst = std::max(worst, std::abs(x * z - center) - fit.half_altitude);
    }
  }
  return worst;
}

}  // namespace zonolip
