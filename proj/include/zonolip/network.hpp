#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "zonolip/activation.hpp"
#include "zonolip/rng.hpp"
#include "zonolip/sets.hpp"

namespace zonolip {

enum class ModelErrorCode {
  kIo,              // file could not be read or written
  kSchema,          // malformed JSON or missing/ill-typed field
  kDimensionChain,  // adjacent layer shapes do not connect
  kNonFinite,       // NaN or infinite weight
};

class ModelError : public std::runtime_error {
 public:
  ModelError(ModelErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ModelErrorCode code() const { return code_; }

 private:
  ModelErrorCode code_;
};

struct AffineLayer {
  Matrix weight;
  Vector bias;
};

struct NonlinLayer {
  Activation kind;
};

using Layer = std::variant<AffineLayer, NonlinLayer>;

// Feedforward network as an ordered list of affine maps and elementwise
// nonlinearities. Construction validates the dimension chain and finiteness.
class Network {
 public:
  Network(Eigen::Index input_dim, std::vector<Layer> layers);

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index output_dim() const { return output_dim_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }

  // Dimension of the vector entering layer k (k == size() gives the output).
  Eigen::Index width_at(std::size_t k) const { return widths_[k]; }

 private:
  Eigen::Index input_dim_;
  Eigen::Index output_dim_;
  std::vector<Layer> layers_;
  std::vector<Eigen::Index> widths_;
};

Vector eval_network(const Network& net, const Vector& x);

struct VJPResult {
  Vector gradient;  // grad f(x)^T u
  // Derivative of each nonlinearity at its pre-activation, in layer order.
  std::vector<Vector> jacobian_diagonals;
};

VJPResult vjp(const Network& net, const Vector& x, const Vector& u);

// Full Jacobian (output_dim x input_dim), backpropagating all output basis
// vectors at once.
Matrix jacobian(const Network& net, const Vector& x);

// Largest ||J^T u||_1 over u in {-1,1}^n. Exhaustive up to
// kExhaustiveSignLimit rows, alternating sign ascent from seeded starts
// beyond that. Always a lower bound on ||J||_{inf->1}.
inline constexpr Eigen::Index kExhaustiveSignLimit = 10;
double best_sign_objective(const Matrix& jac, Rng& rng);

// Max of ||grad f(x)^T u||_1 over n uniform samples x in the region.
// Deterministic for a seed; sample k consumes the same random stream
// regardless of n, so the result is nondecreasing in n.
double sampled_lower_bound(const Network& net, const Hyperbox& region, int n,
                           std::uint64_t seed);

struct RandomNetSpec {
  // Layer widths including input and output, e.g. {2, 3, 1}.
  std::vector<int> widths;
  Activation activation = Activation::kRelu;
  double weight_scale = 1.0;
  // Optional nonlinearity applied to the network output.
  std::optional<Activation> output_activation;
};

// Weights and biases i.i.d. uniform in [-scale, scale], drawn layer by
// layer in row-major order (weights first, then bias).
Network gen_random_net(const RandomNetSpec& spec, std::uint64_t seed);

}  // namespace zonolip
