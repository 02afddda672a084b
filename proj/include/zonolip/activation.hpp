#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace zonolip {

enum class Activation { kRelu, kTanh, kSigmoid };

std::string_view activation_name(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

double activate(Activation a, double x);

// ReLU derivative at exactly 0 is taken as 0.
double activation_derivative(Activation a, double x);

}  // namespace zonolip
