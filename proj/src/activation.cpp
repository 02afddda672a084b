#include "zonolip/activation.hpp"

#include <cmath>
#include <stdexcept>

namespace zonolip {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  throw std::invalid_argument("unknown activation");
}

std::optional<Activation> parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  return std::nullopt;
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kTanh: return std::tanh(x);
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
  }
  throw std::invalid_argument("unknown activation");
}

double activation_derivative(Activation a, double x) {
  switch (a) {
    case Activation::kRelu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(std::abs(x));
      return 1.0 - t * t;
    }
    case Activation::kSigmoid: {
      // Evaluated at |x| so the derivative is exactly even.
      const double e = std::exp(-std::abs(x));
      return e / ((1.0 + e) * (1.0 + e));
    }
  }
  throw std::invalid_argument("unknown activation");
}

}  // namespace zonolip
