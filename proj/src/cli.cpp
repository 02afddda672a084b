#include "zonolip/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "zonolip/error.hpp"
#include "zonolip/model_io.hpp"
#include "zonolip/normmax.hpp"
#include "zonolip/propagate.hpp"
#include "zonolip/vpfit.hpp"

namespace zonolip {
namespace {

using nlohmann::json;
using Json = nlohmann::ordered_json;

// Bad user input that is not tied to a model file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(what + ": malformed JSON: " + e.what());
  }
}

Vector json_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + ": expected a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(what + ": entry " + std::to_string(i) + " is not a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  if (!v.allFinite()) throw InputError(what + ": non-finite entry");
  return v;
}

// Inline JSON when the text starts with '[', otherwise a file path.
Vector vector_arg(const std::string& text, const std::string& what) {
  const auto first = text.find_first_not_of(" \t\n");
  const bool inline_json = first != std::string::npos && text[first] == '[';
  const std::string body = inline_json ? text : read_file(text);
  return json_vector(parse_json_text(body, what), what);
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

Hyperbox region_arg(const Network& net, const std::string& center_text,
                    const std::string& radius_text) {
  const Eigen::Index n = net.input_dim();
  const Vector c = center_text.empty() ? Vector::Zero(n) : vector_arg(center_text, "--center");
  if (c.size() != n) {
    throw InputError("--center has " + std::to_string(c.size()) + " entries, model input is " +
                     std::to_string(n));
  }
  Vector r;
  if (auto scalar = parse_double(radius_text)) {
    r = Vector::Constant(n, *scalar);
  } else {
    const json j = parse_json_text(read_file(radius_text), "--radius");
    r = j.is_number() ? Vector::Constant(n, j.get<double>()) : json_vector(j, "--radius");
  }
  if (r.size() != n) {
    throw InputError("--radius has " + std::to_string(r.size()) + " entries, model input is " +
                     std::to_string(n));
  }
  if (!r.allFinite() || (r.array() < 0.0).any()) {
    throw InputError("--radius must be finite and nonnegative");
  }
  return Hyperbox(c, r);
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json set_json(const AbstractSet& s) {
  Json j;
  if (const auto* h = std::get_if<Hyperbox>(&s)) {
    j["kind"] = "hyperbox";
    j["center"] = vector_json(h->center());
    j["radius"] = vector_json(h->radius());
    return j;
  }
  const auto& z = std::get<Zonotope>(s);
  j["kind"] = "zonotope";
  j["center"] = vector_json(z.center());
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < z.dim(); ++i) rows.push_back(vector_json(z.generators().row(i)));
  j["generators"] = std::move(rows);
  return j;
}

Zonotope zonotope_from_json(const json& j) {
  if (!j.is_object()) throw InputError("zonotope: expected an object");
  if (j.contains("kind") && j["kind"] == "hyperbox") {
    if (!j.contains("center") || !j.contains("radius")) {
      throw InputError("hyperbox: needs \"center\" and \"radius\"");
    }
    const Vector c = json_vector(j["center"], "center");
    const Vector r = json_vector(j["radius"], "radius");
    if (c.size() != r.size() || (r.array() < 0.0).any()) {
      throw InputError("hyperbox: radius must match center and be nonnegative");
    }
    return Zonotope::from_box(Hyperbox(c, r));
  }
  if (!j.contains("center") || !j.contains("generators")) {
    throw InputError("zonotope: needs \"center\" and \"generators\"");
  }
  const Vector c = json_vector(j["center"], "center");
  const json& rows = j["generators"];
  if (!rows.is_array() || rows.size() != static_cast<std::size_t>(c.size())) {
    throw InputError("zonotope: \"generators\" must have one row per center entry");
  }
  const Eigen::Index m = rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size());
  Matrix e(c.size(), m);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const Vector row = json_vector(rows[i], "generators row " + std::to_string(i));
    if (row.size() != m) throw InputError("zonotope: ragged generator rows");
    e.row(i) = row.transpose();
  }
  return Zonotope(c, e);
}

Json trace_json(const LayerTrace& t) {
  Json j;
  Json fwd = Json::array();
  for (const auto& s : t.forward) fwd.push_back(set_json(s));
  Json jac = Json::array();
  for (const auto& h : t.jacobians) jac.push_back(set_json(h));
  Json bwd = Json::array();
  for (const auto& s : t.cotangents) bwd.push_back(set_json(s));
  j["forward"] = std::move(fwd);
  j["jacobians"] = std::move(jac);
  j["cotangents"] = std::move(bwd);
  return j;
}

// Shortest decimal that round-trips, matching the JSON output.
std::string num(double v) { return Json(v).dump(); }

SetDomain domain_flag(const std::string& s) { return *parse_set_domain(s); }
NormMethod norm_flag(const std::string& s) { return *parse_norm_method(s); }

struct RegionFlags {
  std::string model;
  std::string center;
  std::string radius = "0.1";
};

void add_region_flags(CLI::App* cmd, RegionFlags& f) {
  cmd->add_option("--model", f.model, "Model file (zonolip-net/1 JSON)")->required();
  cmd->add_option("--center", f.center, "Center: inline JSON array or file (default zeros)");
  cmd->add_option("--radius", f.radius, "Scalar radius or JSON file (scalar or per-coordinate)");
}

struct BudgetFlags {
  std::size_t budget = 0;
  std::size_t factor = 4;
  bool unlimited = false;

  GeneratorBudget get() const {
    GeneratorBudget b;
    b.factor = factor;
    if (budget > 0) b.absolute = budget;
    b.unlimited = unlimited;
    return b;
  }
};

void add_budget_flags(CLI::App* cmd, BudgetFlags& f) {
  cmd->add_option("--budget", f.budget, "Absolute generator cap per set (0: use factor)");
  cmd->add_option("--budget-factor", f.factor, "Generator cap as a multiple of layer width")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--unlimited", f.unlimited, "Disable generator reduction");
}

const std::vector<std::string> kDomains = {"box", "zono"};
const std::vector<std::string> kNorms = {"box", "lp", "exact"};
const std::vector<std::string> kFormats = {"json", "csv"};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local Lipschitz upper bounds for feedforward networks via zonotopes"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  RegionFlags region;
  BudgetFlags budget;
  std::string forward = "zono", backward = "zono", norm = "lp", format = "json";
  std::uint64_t seed = 0;
  bool timing = false;
  std::string dump_trace;
  int verify_samples = 0;

  auto* certify = app.add_subcommand("certify", "Upper-bound the local Lipschitz constant");
  add_region_flags(certify, region);
  add_budget_flags(certify, budget);
  certify->add_option("--forward", forward, "Forward domain")->check(CLI::IsMember(kDomains));
  certify->add_option("--backward", backward, "Backward domain")->check(CLI::IsMember(kDomains));
  certify->add_option("--norm", norm, "Norm maximization method")->check(CLI::IsMember(kNorms));
  certify->add_option("--seed", seed, "Sampling seed for --verify-samples");
  certify->add_option("--format", format, "Output format")->check(CLI::IsMember(kFormats));
  certify->add_flag("--timing", timing, "Include wall-clock seconds in the output");
  certify->add_option("--dump-trace", dump_trace, "Write every intermediate set as JSON");
  certify->add_option("--verify-samples", verify_samples,
                      "Also compute a sampled lower bound and fail (exit 3) if it exceeds the bound")
      ->check(CLI::NonNegativeNumber);

  int samples = 1000;
  auto* compare = app.add_subcommand("compare", "Bound under all four domain configurations");
  add_region_flags(compare, region);
  add_budget_flags(compare, budget);
  compare->add_option("--norm", norm, "Norm maximization method")->check(CLI::IsMember(kNorms));
  compare->add_option("--seed", seed, "Sampling seed for the reference row");
  compare->add_option("--samples", samples, "Samples for the lower-bound row")
      ->check(CLI::PositiveNumber);
  compare->add_option("--format", format, "Output format")->check(CLI::IsMember(kFormats));
  compare->add_flag("--timing", timing, "Include wall-clock seconds per row");

  std::string op;
  std::vector<double> bounds;
  auto* vpfit = app.add_subcommand("vpfit", "Fit a vertical parallelogram: OP L U [LX UX]");
  vpfit->add_option("op", op, "relu | abs | tanh | sigmoid | mul")->required();
  vpfit->add_option("bounds", bounds, "Interval bounds")->required()->expected(2, 4);

  std::string input;
  std::string method = "lp";
  auto* normmax = app.add_subcommand("normmax", "Maximize the l1 norm over a zonotope");
  normmax->add_option("--input", input, "Zonotope JSON file")->required();
  normmax->add_option("--method", method, "Method")->check(CLI::IsMember(kNorms));

  std::vector<int> widths;
  std::string activation = "relu", output_activation;
  double scale = 1.0;
  std::string out_path;
  auto* gen = app.add_subcommand("gen", "Generate a random network");
  gen->add_option("--widths", widths, "Comma-separated widths, input first")
      ->required()
      ->delimiter(',');
  gen->add_option("--activation", activation, "Hidden activation")
      ->check(CLI::IsMember({"relu", "tanh", "sigmoid"}));
  gen->add_option("--output-activation", output_activation, "Optional output activation")
      ->check(CLI::IsMember({"relu", "tanh", "sigmoid"}));
  gen->add_option("--scale", scale, "Uniform weight range [-s, s]")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--out", out_path, "Output path (stdout when omitted)");

  int n = 1000;
  auto* sample_lb = app.add_subcommand("sample-lb", "Sampled lower bound on the Lipschitz constant");
  add_region_flags(sample_lb, region);
  sample_lb->add_option("--n", n, "Number of samples")->check(CLI::PositiveNumber);
  sample_lb->add_option("--seed", seed, "Seed");

  std::vector<std::string> argv_store = args;
  if (argv_store.empty()) argv_store.emplace_back("zonolip");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (certify->parsed()) {
      const Network net = load_network(region.model);
      const Hyperbox box = region_arg(net, region.center, region.radius);
      ZLipOptions opts;
      opts.domain = {domain_flag(forward), domain_flag(backward)};
      opts.norm_method = norm_flag(norm);
      opts.budget = budget.get();
      opts.keep_trace = !dump_trace.empty();
      const LipschitzReport rep = zlip(net, box, opts);
      std::optional<double> lb;
      if (verify_samples > 0) lb = sampled_lower_bound(net, box, verify_samples, seed);

      if (!dump_trace.empty()) {
        std::ofstream f(dump_trace, std::ios::binary | std::ios::trunc);
        if (!f) throw InputError("cannot write trace file: " + dump_trace);
        f << trace_json(*rep.trace).dump(2) << "\n";
      }
      if (format == "json") {
        Json j;
        j["bound"] = rep.bound;
        j["norm_method"] = std::string(norm_method_name(rep.norm_method));
        j["domain"] = {{"forward", std::string(set_domain_name(rep.domain.forward))},
                       {"backward", std::string(set_domain_name(rep.domain.backward))},
                       {"label", rep.domain.label()}};
        j["dual_ball"] = "linf";
        j["forward_generators"] = rep.forward_generators;
        j["backward_generators"] = rep.backward_generators;
        if (lb) j["lower_bound"] = *lb;
        if (timing) j["wall_time_seconds"] = rep.wall_time_seconds;
        out << j.dump(2) << "\n";
      } else {
        out << "bound,norm_method,domain" << (lb ? ",lower_bound" : "")
            << (timing ? ",wall_time_seconds" : "") << "\n";
        out << num(rep.bound) << "," << norm_method_name(rep.norm_method) << ","
            << rep.domain.label();
        if (lb) out << "," << num(*lb);
        if (timing) out << "," << num(rep.wall_time_seconds);
        out << "\n";
      }
      if (lb && *lb > rep.bound * (1.0 + 1e-12) + 1e-12) {
        err << "invariant violated: sampled lower bound " << num(*lb) << " exceeds bound "
            << num(rep.bound) << "\n";
        return kExitInvariant;
      }
      return kExitOk;
    }

    if (compare->parsed()) {
      const Network net = load_network(region.model);
      const Hyperbox box = region_arg(net, region.center, region.radius);
      struct Row {
        std::string label;
        double bound;
        double seconds;
      };
      std::vector<Row> rows;
      for (const char* label : {"ZZ", "HH", "HZ", "ZH"}) {
        ZLipOptions opts;
        opts.domain = *DomainChoice::parse(label);
        opts.norm_method = norm_flag(norm);
        opts.budget = budget.get();
        const LipschitzReport rep = zlip(net, box, opts);
        rows.push_back({label, rep.bound, rep.wall_time_seconds});
      }
      const auto t0 = std::chrono::steady_clock::now();
      const double lb = sampled_lower_bound(net, box, samples, seed);
      const double lb_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rows.push_back({"LB", lb, lb_seconds});
      const double zz = rows.front().bound;
      auto ratio = [&](double b) -> std::optional<double> {
        if (!(zz > 0.0)) return std::nullopt;
        return b / zz;
      };
      if (format == "json") {
        Json arr = Json::array();
        for (const Row& r : rows) {
          Json j;
          j["config"] = r.label;
          j["bound"] = r.bound;
          if (auto q = ratio(r.bound)) j["ratio_to_ZZ"] = *q;
          else j["ratio_to_ZZ"] = nullptr;
          if (timing) j["time_seconds"] = r.seconds;
          arr.push_back(std::move(j));
        }
        Json doc;
        doc["norm_method"] = norm;
        doc["rows"] = std::move(arr);
        out << doc.dump(2) << "\n";
      } else {
        out << "config,bound,ratio_to_ZZ" << (timing ? ",time_seconds" : "") << "\n";
        for (const Row& r : rows) {
          out << r.label << "," << num(r.bound) << ",";
          if (auto q = ratio(r.bound)) out << num(*q);
          if (timing) out << "," << num(r.seconds);
          out << "\n";
        }
      }
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (lb > rows[i].bound * (1.0 + 1e-12) + 1e-12) {
          err << "invariant violated: " << rows[i].label << " bound below sampled lower bound\n";
          return kExitInvariant;
        }
      }
      return kExitOk;
    }

    if (vpfit->parsed()) {
      VPFit fit;
      if (op == "mul") {
        if (bounds.size() != 4) throw InputError("vpfit mul needs LZ UZ LX UX");
        fit = vp_fit_mul(MulBounds{bounds[0], bounds[1], bounds[2], bounds[3]});
      } else {
        const auto sop = parse_scalar_op(op);
        if (!sop) throw InputError("vpfit: unknown operator \"" + op + "\"");
        if (bounds.size() != 2) throw InputError("vpfit " + op + " needs L U");
        fit = vp_fit(*sop, bounds[0], bounds[1]);
      }
      Json j;
      j["slope"] = fit.slope;
      j["intercept"] = fit.intercept;
      j["half_altitude"] = fit.half_altitude;
      out << j.dump(2) << "\n";
      return kExitOk;
    }

    if (normmax->parsed()) {
      const Zonotope z = zonotope_from_json(parse_json_text(read_file(input), "--input"));
      const NormMaxResult r = l1max(z, norm_flag(method));
      Json j;
      j["value"] = r.value;
      j["method"] = std::string(norm_method_name(r.method));
      if (r.witness) j["witness"] = *r.witness;
      else j["witness"] = nullptr;
      out << j.dump(2) << "\n";
      return kExitOk;
    }

    if (gen->parsed()) {
      RandomNetSpec spec;
      spec.widths = widths;
      spec.activation = *parse_activation(activation);
      if (!output_activation.empty()) spec.output_activation = parse_activation(output_activation);
      spec.weight_scale = scale;
      const Network net = gen_random_net(spec, seed);
      if (out_path.empty()) {
        out << serialize_network(net);
      } else {
        save_network(net, out_path);
      }
      return kExitOk;
    }

    if (sample_lb->parsed()) {
      const Network net = load_network(region.model);
      const Hyperbox box = region_arg(net, region.center, region.radius);
      Json j;
      j["lower_bound"] = sampled_lower_bound(net, box, n, seed);
      j["samples"] = n;
      j["seed"] = seed;
      out << j.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::logic_error& e) {
    // DimensionError and invalid_argument derive from logic_error too.
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  err << "error: no subcommand\n";
  return kExitInput;
}

}  // namespace zonolip
