#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zonolip/network.hpp"
#include "zonolip/normmax.hpp"
#include "zonolip/sets.hpp"

namespace zonolip {

enum class SetDomain { kBox, kZono };

std::string_view set_domain_name(SetDomain d);
std::optional<SetDomain> parse_set_domain(std::string_view name);

struct DomainChoice {
  SetDomain forward = SetDomain::kZono;
  SetDomain backward = SetDomain::kZono;

  // Two letters, forward first: "ZZ", "HH" (interval baseline), "HZ", "ZH".
  std::string label() const;
  static std::optional<DomainChoice> parse(std::string_view label);

  friend bool operator==(const DomainChoice&, const DomainChoice&) = default;
};

using AbstractSet = std::variant<Hyperbox, Zonotope>;

Hyperbox interval_hull(const AbstractSet& s);
Eigen::Index generator_count(const AbstractSet& s);

// Cap on zonotope generator columns, enforced after every nonlinear step.
// The default is factor * (current width); an absolute cap overrides it.
struct GeneratorBudget {
  std::size_t factor = 4;
  std::optional<std::size_t> absolute;
  bool unlimited = false;

  std::size_t limit(Eigen::Index width) const;
};

struct LayerTrace {
  // forward[k] is the set entering layer k; forward.back() is the output set.
  std::vector<AbstractSet> forward;
  // One Jacobian box per nonlinear layer, in layer order.
  std::vector<Hyperbox> jacobians;
  // cotangents[k] encloses grad^T u at the input of layer k; cotangents.back()
  // is the dual unit ball and cotangents.front() is the final set.
  std::vector<AbstractSet> cotangents;
};

// (Lambda .* Z) + Z(b, diag(mu)); a column is added only where mu > 0.
Zonotope map_nonlin(Activation sigma, const Zonotope& z);
// Exact interval image of a monotone activation.
Hyperbox map_nonlin_box(Activation sigma, const Hyperbox& h);

Hyperbox elementwise_jacobian(Activation sigma, const Hyperbox& pre);
Hyperbox elementwise_jacobian(Activation sigma, const Zonotope& pre);

// Encloses {x .* y : x in j, y in Y}.
Zonotope elementwise_mul_set(const Hyperbox& j, const Zonotope& y);
Hyperbox elementwise_mul_box(const Hyperbox& j, const Hyperbox& y);

// Fills forward and jacobians.
LayerTrace forward_pass(const Network& net, const Hyperbox& region, SetDomain domain,
                        const GeneratorBudget& budget = {});
// Fills cotangents from a trace produced by forward_pass on the same network.
void backward_pass(const Network& net, LayerTrace& trace, SetDomain domain,
                   const GeneratorBudget& budget = {});

struct LipschitzReport {
  // Upper bound on sup_{x in region} max_{|u|_inf <= 1} ||grad f(x)^T u||_1.
  double bound = 0.0;
  NormMethod norm_method = NormMethod::kLp;
  DomainChoice domain;
  // Generator columns of every forward / backward set, in trace order
  // (0 for hyperboxes).
  std::vector<Eigen::Index> forward_generators;
  std::vector<Eigen::Index> backward_generators;
  double wall_time_seconds = 0.0;
  std::optional<LayerTrace> trace;
};

struct ZLipOptions {
  DomainChoice domain;
  NormMethod norm_method = NormMethod::kLp;
  GeneratorBudget budget;
  int max_dof = kDefaultMaxDof;
  bool keep_trace = false;
};

// A hyperbox final set is maximized in closed form whatever the method.
LipschitzReport zlip(const Network& net, const Hyperbox& region, const ZLipOptions& opts = {});

}  // namespace zonolip
