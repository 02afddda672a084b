#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "zonolip/network.hpp"

namespace zonolip {

inline constexpr std::string_view kModelVersion = "zonolip-net/1";

// Standard base64 alphabet with '=' padding.
std::string base64_encode(std::string_view bytes);
// Throws ModelError(kSchema) on characters outside the alphabet or bad padding.
std::string base64_decode(std::string_view text);

// Doubles travel as little-endian IEEE-754 binary64.
std::string encode_doubles(const std::vector<double>& values);
std::vector<double> decode_doubles(std::string_view b64);

// Parse a model document. Conv layers are lowered to dense affine layers.
Network parse_network(std::string_view json_text);
Network load_network(const std::string& path);

// Serializes every affine layer as "dense"; conv structure is not kept.
std::string serialize_network(const Network& net);
void save_network(const Network& net, const std::string& path);

}  // namespace zonolip
