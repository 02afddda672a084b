#include "zonolip/normmax.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace zonolip {

std::string_view norm_method_name(NormMethod m) {
  switch (m) {
    case NormMethod::kBox: return "box";
    case NormMethod::kLp: return "lp";
    case NormMethod::kExact: return "exact";
  }
  return "?";
}

std::optional<NormMethod> parse_norm_method(std::string_view name) {
  if (name == "box" || name == "hyperbox") return NormMethod::kBox;
  if (name == "lp") return NormMethod::kLp;
  if (name == "exact") return NormMethod::kExact;
  return std::nullopt;
}

NormMaxResult l1max_hyperbox(const Hyperbox& h) {
  const double v = (h.center().cwiseAbs() + h.radius()).sum();
  return {v, NormMethod::kBox, std::nullopt};
}

NormMaxResult l1max_hyperbox(const Zonotope& z) {
  return l1max_hyperbox(zono_interval_hull(z));
}

NormMaxResult l1max_lp(const Zonotope& z) {
  const Hyperbox hull = zono_interval_hull(z);
  const Vector lo = hull.lower();
  const Vector hi = hull.upper();
  Vector a(z.dim());
  double constant = 0.0;
  for (Eigen::Index i = 0; i < z.dim(); ++i) {
    const double l = lo(i);
    const double u = hi(i);
    if (u - l < kDegenerateWidth) {
      // Stable at the sign of the midpoint.
      a(i) = 0.5 * (l + u) < 0.0 ? -1.0 : 1.0;
    } else if (u <= 0.0) {
      a(i) = -1.0;
    } else if (l > 0.0) {
      a(i) = 1.0;
    } else {
      a(i) = (u + l) / (u - l);
      constant += -2.0 * u * l / (u - l);
    }
  }
  LinMaxResult lm = zono_linmax(z, a);
  return {constant + lm.value, NormMethod::kLp, std::move(lm.witness)};
}

NormMaxResult l1max_exact(const Zonotope& z, int max_dof) {
  const Eigen::Index m = z.num_generators();
  if (m > max_dof) {
    throw std::invalid_argument("l1max_exact: " + std::to_string(m) +
                                " generators exceed max_dof " + std::to_string(max_dof));
  }
  const Matrix& e = z.generators();
  // Lexicographic order over y with bit k (from the left) set meaning +1.
  std::vector<int> y(static_cast<std::size_t>(m), -1);
  Vector point = z.center() - e.rowwise().sum();
  double best = point.lpNorm<1>();
  std::vector<int> witness = y;
  const std::uint64_t count = std::uint64_t{1} << m;
  constexpr std::uint64_t kRefresh = 4096;
  for (std::uint64_t idx = 1; idx < count; ++idx) {
    if (idx % kRefresh == 0) {
      // Full recompute bounds incremental rounding drift.
      for (Eigen::Index k = 0; k < m; ++k) {
        y[k] = ((idx >> (m - 1 - k)) & 1) != 0 ? 1 : -1;
      }
      point = z.center();
      for (Eigen::Index k = 0; k < m; ++k) point += y[k] * e.col(k);
    } else {
      // Binary increment: trailing ones become -1, the next zero becomes +1.
      for (Eigen::Index k = m - 1; k >= 0; --k) {
        if (y[k] == 1) {
          y[k] = -1;
          point -= 2.0 * e.col(k);
        } else {
          y[k] = 1;
          point += 2.0 * e.col(k);
          break;
        }
      }
    }
    const double v = point.lpNorm<1>();
    if (v > best) {
      best = v;
      witness = y;
    }
  }
  return {best, NormMethod::kExact, std::move(witness)};
}

NormMaxResult l1max(const Zonotope& z, NormMethod method, int max_dof) {
  switch (method) {
    case NormMethod::kBox: return l1max_hyperbox(z);
    case NormMethod::kLp: return l1max_lp(z);
    case NormMethod::kExact: return l1max_exact(z, max_dof);
  }
  throw std::invalid_argument("l1max: unknown method");
}

double matnorm_inf_to_1(const Matrix& m, NormMethod method, int max_dof) {
  return l1max(Zonotope(Vector::Zero(m.rows()), m), method, max_dof).value;
}

}  // namespace zonolip
