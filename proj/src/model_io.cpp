#include "zonolip/model_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "zonolip/conv.hpp"
#include "zonolip/error.hpp"

namespace zonolip {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

[[noreturn]] void schema_error(const std::string& what) {
  throw ModelError(ModelErrorCode::kSchema, what);
}

int decode_char(char ch) {
  if (ch >= 'A' && ch <= 'Z') return ch - 'A';
  if (ch >= 'a' && ch <= 'z') return ch - 'a' + 26;
  if (ch >= '0' && ch <= '9') return ch - '0' + 52;
  if (ch == '+') return 62;
  if (ch == '/') return 63;
  return -1;
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + ": missing field \"" + key + "\"");
  return *it;
}

int int_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) schema_error(where + ": \"" + key + "\" must be an integer");
  const auto value = v.get<std::int64_t>();
  if (value < 0 || value > (std::int64_t{1} << 30)) {
    schema_error(where + ": \"" + key + "\" out of range");
  }
  return static_cast<int>(value);
}

std::vector<double> blob_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) schema_error(where + ": \"" + key + "\" must be a base64 string");
  try {
    return decode_doubles(v.get_ref<const std::string&>());
  } catch (const ModelError& e) {
    schema_error(where + ": \"" + key + "\": " + e.what());
  }
}

void require_size(const std::vector<double>& v, std::size_t n, const std::string& where,
                  const char* key) {
  if (v.size() != n) {
    throw ModelError(ModelErrorCode::kDimensionChain,
                     where + ": \"" + key + "\" holds " + std::to_string(v.size()) +
                         " values, expected " + std::to_string(n));
  }
}

void require_finite(const std::vector<double>& v, const std::string& where) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ModelError(ModelErrorCode::kNonFinite, where + ": non-finite weight");
  }
}

AffineLayer dense_layer(const json& obj, const std::string& where) {
  const int rows = int_field(obj, "rows", where);
  const int cols = int_field(obj, "cols", where);
  const auto w = blob_field(obj, "w_b64", where);
  const auto b = blob_field(obj, "b_b64", where);
  require_size(w, static_cast<std::size_t>(rows) * cols, where, "w_b64");
  require_size(b, static_cast<std::size_t>(rows), where, "b_b64");
  require_finite(w, where);
  require_finite(b, where);
  AffineLayer a{Matrix(rows, cols), Vector(rows)};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) a.weight(r, c) = w[static_cast<std::size_t>(r) * cols + c];
    a.bias(r) = b[r];
  }
  return a;
}

AffineLayer conv_layer(const json& obj, bool transpose, const std::string& where) {
  ConvSpec spec;
  spec.transpose = transpose;
  spec.in_channels = int_field(obj, "in_channels", where);
  spec.in_height = int_field(obj, "in_height", where);
  spec.in_width = int_field(obj, "in_width", where);
  spec.out_channels = int_field(obj, "out_channels", where);
  spec.kernel_h = int_field(obj, "kernel_h", where);
  spec.kernel_w = int_field(obj, "kernel_w", where);
  spec.stride = obj.contains("stride") ? int_field(obj, "stride", where) : 1;
  spec.padding = obj.contains("padding") ? int_field(obj, "padding", where) : 0;
  spec.weights = blob_field(obj, "w_b64", where);
  if (obj.contains("b_b64")) spec.bias = blob_field(obj, "b_b64", where);
  require_finite(spec.weights, where);
  require_finite(spec.bias, where);
  try {
    return lower_conv(spec);
  } catch (const DimensionError& e) {
    throw ModelError(ModelErrorCode::kDimensionChain, where + ": " + e.what());
  }
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t n = (std::uint32_t{static_cast<unsigned char>(bytes[i])} << 16) |
                            (std::uint32_t{static_cast<unsigned char>(bytes[i + 1])} << 8) |
                            std::uint32_t{static_cast<unsigned char>(bytes[i + 2])};
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t n = std::uint32_t{static_cast<unsigned char>(bytes[i])} << 16;
    if (rest == 2) n |= std::uint32_t{static_cast<unsigned char>(bytes[i + 1])} << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += rest == 2 ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) {
    throw ModelError(ModelErrorCode::kSchema, "base64 length is not a multiple of 4");
  }
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::array<int, 4> v{};
    for (int k = 0; k < 4; ++k) {
      const char ch = text[i + k];
      if (ch == '=' && last && k >= 2) {
        ++pad;
        v[k] = 0;
        continue;
      }
      if (pad > 0 || (v[k] = decode_char(ch)) < 0) {
        throw ModelError(ModelErrorCode::kSchema, "invalid base64 character");
      }
    }
    const std::uint32_t n = (std::uint32_t(v[0]) << 18) | (std::uint32_t(v[1]) << 12) |
                            (std::uint32_t(v[2]) << 6) | std::uint32_t(v[3]);
    out += static_cast<char>((n >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((n >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(n & 0xff);
  }
  return out;
}

std::string encode_doubles(const std::vector<double>& values) {
  std::string bytes(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int k = 0; k < 8; ++k) bytes[i * 8 + k] = static_cast<char>((bits >> (8 * k)) & 0xff);
  }
  return base64_encode(bytes);
}

std::vector<double> decode_doubles(std::string_view b64) {
  const std::string bytes = base64_decode(b64);
  if (bytes.size() % 8 != 0) {
    throw ModelError(ModelErrorCode::kSchema, "blob length is not a multiple of 8 bytes");
  }
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) {
      bits |= std::uint64_t{static_cast<unsigned char>(bytes[i * 8 + k])} << (8 * k);
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

Network parse_network(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("model document must be an object");
  const json& version = field(doc, "version", "model");
  if (!version.is_string() || version.get<std::string>() != kModelVersion) {
    schema_error("model: unsupported version (expected \"" + std::string(kModelVersion) + "\")");
  }
  const int input_dim = int_field(doc, "input_dim", "model");
  const json& layers_json = field(doc, "layers", "model");
  if (!layers_json.is_array()) schema_error("model: \"layers\" must be an array");

  std::vector<Layer> layers;
  for (std::size_t k = 0; k < layers_json.size(); ++k) {
    const std::string where = "layer " + std::to_string(k);
    const json& obj = layers_json[k];
    if (!obj.is_object()) schema_error(where + ": must be an object");
    const json& type = field(obj, "type", where);
    if (!type.is_string()) schema_error(where + ": \"type\" must be a string");
    const std::string& t = type.get_ref<const std::string&>();
    if (t == "dense") {
      layers.emplace_back(dense_layer(obj, where));
    } else if (t == "conv2d" || t == "convT2d") {
      layers.emplace_back(conv_layer(obj, t == "convT2d", where));
    } else if (auto act = parse_activation(t)) {
      layers.emplace_back(NonlinLayer{*act});
    } else {
      schema_error(where + ": unknown layer type \"" + t + "\"");
    }
  }
  return Network(input_dim, std::move(layers));
}

Network load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(ModelErrorCode::kIo, "cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw ModelError(ModelErrorCode::kIo, "error reading model file: " + path);
  return parse_network(ss.str());
}

std::string serialize_network(const Network& net) {
  ordered_json doc;
  doc["version"] = std::string(kModelVersion);
  doc["input_dim"] = net.input_dim();
  ordered_json layers = ordered_json::array();
  for (const Layer& layer : net.layers()) {
    ordered_json obj;
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      std::vector<double> w(static_cast<std::size_t>(a->weight.size()));
      for (Eigen::Index r = 0; r < a->weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < a->weight.cols(); ++c) {
          w[static_cast<std::size_t>(r * a->weight.cols() + c)] = a->weight(r, c);
        }
      }
      obj["type"] = "dense";
      obj["rows"] = a->weight.rows();
      obj["cols"] = a->weight.cols();
      obj["w_b64"] = encode_doubles(w);
      obj["b_b64"] = encode_doubles(std::vector<double>(a->bias.begin(), a->bias.end()));
    } else {
      obj["type"] = std::string(activation_name(std::get<NonlinLayer>(layer).kind));
    }
    layers.push_back(std::move(obj));
  }
  doc["layers"] = std::move(layers);
  return doc.dump(2) + "\n";
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelError(ModelErrorCode::kIo, "cannot write model file: " + path);
  out << serialize_network(net);
  if (!out) throw ModelError(ModelErrorCode::kIo, "error writing model file: " + path);
}

}  // namespace zonolip
