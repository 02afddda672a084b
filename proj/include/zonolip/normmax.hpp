#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "zonolip/sets.hpp"

namespace zonolip {

enum class NormMethod { kBox, kLp, kExact };

std::string_view norm_method_name(NormMethod m);
std::optional<NormMethod> parse_norm_method(std::string_view name);

struct NormMaxResult {
  double value = 0.0;
  NormMethod method = NormMethod::kBox;
  // Generator coefficients in {-1,+1}^m attaining the value (lp and exact).
  std::optional<std::vector<int>> witness;
};

inline constexpr int kDefaultMaxDof = 20;
// Width below which an unstable coordinate is treated as stable.
inline constexpr double kDegenerateWidth = 1e-12;

// Upper bounds (or exact values) of max_{z in Z} ||z||_1.
NormMaxResult l1max_hyperbox(const Zonotope& z);
NormMaxResult l1max_hyperbox(const Hyperbox& h);
NormMaxResult l1max_lp(const Zonotope& z);
// Enumerates all 2^m vertices; throws std::invalid_argument when m > max_dof.
// Equal values keep the lexicographically smallest witness (-1 < +1).
NormMaxResult l1max_exact(const Zonotope& z, int max_dof = kDefaultMaxDof);
NormMaxResult l1max(const Zonotope& z, NormMethod method, int max_dof = kDefaultMaxDof);

// ||M||_{inf->1} = max_{|v|_inf <= 1} ||M v||_1, evaluated as the l1 max
// over Z(0, M). Only exact is exact; the others are upper bounds.
double matnorm_inf_to_1(const Matrix& m, NormMethod method, int max_dof = kDefaultMaxDof);

}  // namespace zonolip
