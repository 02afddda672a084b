#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "zonolip/error.hpp"
#include "zonolip/propagate.hpp"
#include "zonolip/vpfit.hpp"

using namespace zonolip;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// For an output built as [scaled input generators | one column per row with
// mu > 0], reconstructs the coefficients that realize `target` from the
// input coefficients y, returning the largest |coefficient| needed.
double witness_norm(const Zonotope& in, const Zonotope& out, const Vector& y, const Vector& target) {
  const Eigen::Index m = in.num_generators();
  REQUIRE(out.num_generators() >= m);
  const Vector base = out.center() + out.generators().leftCols(m) * y;
  double worst = 0;
  Eigen::Index col = m;
  for (Eigen::Index i = 0; i < out.dim(); ++i) {
    const double gap = target(i) - base(i);
    if (col < out.num_generators() && out.generators()(i, col) > 0.0) {
      worst = std::max(worst, std::abs(gap) / out.generators()(i, col));
      ++col;
    } else {
      worst = std::max(worst, std::abs(gap) > 1e-12 ? INFINITY : 0.0);
    }
  }
  return worst;
}

Network relu_scalar() {
  return Network(1, {AffineLayer{Matrix::Ones(1, 1), Vector::Zero(1)}, NonlinLayer{Activation::kRelu}});
}

}  // namespace

TEST_CASE("domain labels") {
  CHECK(DomainChoice{SetDomain::kBox, SetDomain::kBox}.label() == "HH");
  CHECK(DomainChoice{SetDomain::kBox, SetDomain::kZono}.label() == "HZ");
  CHECK(DomainChoice::parse("ZH") == DomainChoice{SetDomain::kZono, SetDomain::kBox});
  CHECK(!DomainChoice::parse("ZX"));
}

TEST_CASE("map_nonlin on stable positive relu is the identity") {
  const Zonotope z(vec({3, 4}), Matrix::Identity(2, 2));
  const Zonotope out = map_nonlin(Activation::kRelu, z);
  CHECK(out.center() == z.center());
  CHECK(out.generators() == z.generators());
}

TEST_CASE("map_nonlin on a scalar unstable relu") {
  const Zonotope z(vec({0.5}), Matrix::Constant(1, 1, 1.5));
  const Zonotope out = map_nonlin(Activation::kRelu, z);
  CHECK(out.center()(0) == doctest::Approx(2.0 / 3 * 0.5 + 1.0 / 3));
  REQUIRE(out.num_generators() == 2);
  CHECK(out.generators()(0, 0) == doctest::Approx(1.0));
  CHECK(out.generators()(0, 1) == doctest::Approx(1.0 / 3));
  const Hyperbox h = zono_interval_hull(out);
  CHECK(h.lower()(0) == doctest::Approx(-2.0 / 3));
  CHECK(h.upper()(0) == doctest::Approx(2.0));
  for (int k = 0; k <= 300; ++k) {
    const Vector y = vec({-1.0 + 2.0 * k / 300});
    const Vector target = z.eval(y).cwiseMax(0.0);
    CHECK(witness_norm(z, out, y, target) <= 1.0);
  }
}

TEST_CASE("map_nonlin contains sampled images") {
  Rng rng(71);
  for (Activation act : {Activation::kRelu, Activation::kTanh, Activation::kSigmoid}) {
    for (int t = 0; t < 40; ++t) {
      const int d = rng.uniform_int(1, 5), m = rng.uniform_int(1, 6);
      const Zonotope z(oracle::random_vector(rng, d, 2), oracle::random_matrix(rng, d, m, 2));
      const Zonotope out = map_nonlin(act, z);
      // One residual column per coordinate with positive altitude.
      CHECK(out.num_generators() - m <= d);
      for (int s = 0; s < 50; ++s) {
        const Vector y = oracle::random_coeffs(rng, m);
        const Vector target = z.eval(y).unaryExpr([&](double v) { return activate(act, v); });
        CHECK(witness_norm(z, out, y, target) <= 1.0 + 1e-12);
      }
    }
  }
  const Zonotope unit(Vector::Zero(2), Matrix::Identity(2, 2));
  const Hyperbox h = zono_interval_hull(map_nonlin(Activation::kTanh, unit));
  CHECK((h.lower().array() >= -1.0).all());
  CHECK((h.upper().array() <= 1.0).all());
}

TEST_CASE("map_nonlin_box is the interval image") {
  const Hyperbox h = map_nonlin_box(Activation::kRelu, Hyperbox::from_bounds(vec({-1, 1}), vec({2, 3})));
  CHECK(h.lower() == vec({0, 1}));
  CHECK(h.upper() == vec({2, 3}));
}

TEST_CASE("elementwise jacobian boxes") {
  auto bounds = [](Activation a, double l, double u) {
    const Hyperbox j = elementwise_jacobian(a, Hyperbox::from_bounds(vec({l}), vec({u})));
    return std::pair{j.lower()(0), j.upper()(0)};
  };
  CHECK(bounds(Activation::kRelu, 1, 3) == std::pair{1.0, 1.0});
  CHECK(bounds(Activation::kRelu, -1, 2) == std::pair{0.0, 1.0});
  CHECK(bounds(Activation::kRelu, -1, 0) == std::pair{0.0, 0.0});
  const auto [lo, hi] = bounds(Activation::kTanh, 1, 2);
  CHECK(lo == doctest::Approx(0.070651).epsilon(1e-5));
  CHECK(hi == doctest::Approx(0.419974).epsilon(1e-5));
  const auto [slo, shi] = bounds(Activation::kSigmoid, -1, 3);
  CHECK(shi == doctest::Approx(0.25));
  CHECK(slo == doctest::Approx(activation_derivative(Activation::kSigmoid, 3)));

  // Dense grid oracle for the derivative range.
  Rng rng(72);
  for (Activation act : {Activation::kTanh, Activation::kSigmoid}) {
    for (int t = 0; t < 100; ++t) {
      double l = rng.uniform(-4, 4), u = rng.uniform(-4, 4);
      if (l > u) std::swap(l, u);
      const auto [jl, ju] = bounds(act, l, u);
      for (int k = 0; k <= 200; ++k) {
        const double d = activation_derivative(act, l + (u - l) * k / 200);
        CHECK(d >= jl - 1e-15);
        CHECK(d <= ju + 1e-15);
      }
    }
  }
}

TEST_CASE("elementwise_mul_set") {
  Rng rng(73);
  const Zonotope y(oracle::random_vector(rng, 3), oracle::random_matrix(rng, 3, 4));
  const Zonotope same = elementwise_mul_set(Hyperbox::point(Vector::Ones(3)), y);
  CHECK((same.center() - y.center()).norm() < 1e-15);
  CHECK(same.generators() == y.generators());

  const Vector lam = vec({2, -1, 0.5});
  const Zonotope scaled = elementwise_mul_set(Hyperbox::point(lam), y);
  CHECK(scaled.num_generators() == y.num_generators());
  CHECK((scaled.generators() - lam.asDiagonal() * y.generators()).norm() < 1e-15);

  const Zonotope seg(Vector::Zero(1), Matrix::Ones(1, 1));
  const Zonotope r = elementwise_mul_set(Hyperbox::from_bounds(vec({0}), vec({1})), seg);
  CHECK(r.center()(0) == doctest::Approx(0.0));
  REQUIRE(r.num_generators() == 2);
  CHECK(r.generators()(0, 0) == doctest::Approx(0.5));
  CHECK(r.generators()(0, 1) == doctest::Approx(0.5));
  for (int i = 0; i <= 40; ++i) {
    for (int k = 0; k <= 40; ++k) {
      const double z = -1 + 2.0 * i / 40, x = k / 40.0;
      CHECK(witness_norm(seg, r, vec({z}), vec({x * z})) <= 1.0 + 1e-12);
    }
  }
  CHECK_THROWS_AS(elementwise_mul_set(Hyperbox::point(Vector::Ones(2)), y), DimensionError);

  for (int t = 0; t < 50; ++t) {
    const int d = rng.uniform_int(1, 4), m = rng.uniform_int(1, 5);
    const Zonotope z(oracle::random_vector(rng, d), oracle::random_matrix(rng, d, m));
    const Vector a = oracle::random_vector(rng, d), b = oracle::random_vector(rng, d);
    const Hyperbox j = Hyperbox::from_bounds(a.cwiseMin(b), a.cwiseMax(b));
    const Zonotope out = elementwise_mul_set(j, z);
    const Hyperbox ob = elementwise_mul_box(j, zono_interval_hull(z));
    for (int s = 0; s < 30; ++s) {
      const Vector y = oracle::random_coeffs(rng, m);
      Vector x(d);
      for (int i = 0; i < d; ++i) x(i) = rng.uniform(j.lower()(i), j.upper()(i));
      const Vector target = x.cwiseProduct(z.eval(y));
      CHECK(witness_norm(z, out, y, target) <= 1.0 + 1e-12);
      CHECK(ob.contains(target, 1e-12));
    }
  }
}

TEST_CASE("forward pass on affine and stable networks") {
  Rng rng(74);
  const Matrix w = oracle::random_matrix(rng, 3, 2);
  const Vector b = oracle::random_vector(rng, 3);
  const Network aff(2, {AffineLayer{w, b}});
  const Hyperbox region(vec({0.1, -0.2}), vec({0.3, 0.5}));
  const LayerTrace tr = forward_pass(aff, region, SetDomain::kZono);
  const auto& out = std::get<Zonotope>(tr.forward.back());
  for (int s = 0; s < 100; ++s) {
    const Vector y = oracle::random_coeffs(rng, 2);
    const Vector x = region.center() + region.radius().cwiseProduct(y);
    CHECK((out.eval(y) - (w * x + b)).norm() < 1e-12);
  }

  const Network pos(2, {AffineLayer{Matrix::Identity(2, 2), vec({5, 5})}, NonlinLayer{Activation::kRelu}});
  const LayerTrace tp = forward_pass(pos, region, SetDomain::kZono);
  const auto& pre = std::get<Zonotope>(tp.forward[1]);
  const auto& post = std::get<Zonotope>(tp.forward[2]);
  CHECK(post.num_generators() == pre.num_generators());
  CHECK(post.generators() == pre.generators());
  CHECK(post.center() == pre.center());
}

TEST_CASE("forward sets contain concrete executions; zonotope hulls beat boxes per layer") {
  Rng rng(75);
  for (Activation act : {Activation::kRelu, Activation::kTanh, Activation::kSigmoid}) {
    RandomNetSpec spec{{3, 8, 8, 2}, act, 1.0, std::nullopt};
    const Network net = gen_random_net(spec, 7);
    const Hyperbox region(oracle::random_vector(rng, 3), Vector::Constant(3, 0.4));
    const LayerTrace tz = forward_pass(net, region, SetDomain::kZono);
    const LayerTrace tb = forward_pass(net, region, SetDomain::kBox);
    for (int s = 0; s < 1000; ++s) {
      Vector h = region.center() + region.radius().cwiseProduct(oracle::random_coeffs(rng, 3));
      for (std::size_t k = 0; k < net.size(); ++k) {
        CHECK(interval_hull(tz.forward[k]).contains(h, 1e-9));
        CHECK(interval_hull(tb.forward[k]).contains(h, 1e-9));
        std::visit([&](const auto& layer) {
          using T = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<T, AffineLayer>) h = layer.weight * h + layer.bias;
          else h = h.unaryExpr([&](double v) { return activate(layer.kind, v); });
        }, net.layers()[k]);
      }
      CHECK(interval_hull(tz.forward.back()).contains(h, 1e-9));
    }
    for (std::size_t k = 0; k < net.size(); ++k) {
      const auto* a = std::get_if<AffineLayer>(&net.layers()[k]);
      if (!a) continue;
      const Hyperbox zh = interval_hull(tz.forward[k + 1]);
      const Hyperbox bh = affine_map_box(a->weight, a->bias, interval_hull(tz.forward[k]));
      CHECK((zh.lower().array() >= bh.lower().array() - 1e-12).all());
      CHECK((zh.upper().array() <= bh.upper().array() + 1e-12).all());
    }
  }
}

TEST_CASE("generator accounting and budget") {
  Rng rng(76);
  RandomNetSpec spec{{4, 10, 10, 10, 3}, Activation::kRelu, 1.0, std::nullopt};
  const Network net = gen_random_net(spec, 8);
  const Hyperbox region(Vector::Zero(4), Vector::Constant(4, 0.5));
  GeneratorBudget unlimited;
  unlimited.unlimited = true;
  const LayerTrace tr = forward_pass(net, region, SetDomain::kZono, unlimited);
  for (std::size_t k = 0; k < net.size(); ++k) {
    const auto* n = std::get_if<NonlinLayer>(&net.layers()[k]);
    if (!n) continue;
    const auto& z = std::get<Zonotope>(tr.forward[k]);
    const Hyperbox h = zono_interval_hull(z);
    int positive = 0;
    for (Eigen::Index i = 0; i < z.dim(); ++i) {
      if (vp_fit(to_scalar_op(n->kind), h.lower()(i), h.upper()(i)).half_altitude > 0) ++positive;
    }
    CHECK(generator_count(tr.forward[k + 1]) == z.num_generators() + positive);
  }

  GeneratorBudget tight;
  tight.absolute = 12;
  const LayerTrace tt = forward_pass(net, region, SetDomain::kZono, tight);
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (std::holds_alternative<NonlinLayer>(net.layers()[k])) {
      CHECK(generator_count(tt.forward[k + 1]) <= 12);
    }
  }
  CHECK(GeneratorBudget{}.limit(10) == 40);
}

TEST_CASE("backward pass examples") {
  Matrix w(2, 2);
  w << 1, 2, 3, 4;
  const Network aff(2, {AffineLayer{w, Vector::Zero(2)}});
  const Hyperbox region(Vector::Zero(2), Vector::Ones(2));
  LayerTrace tr = forward_pass(aff, region, SetDomain::kZono);
  backward_pass(aff, tr, SetDomain::kZono);
  const auto& y0 = std::get<Zonotope>(tr.cotangents.front());
  CHECK(y0.center().isZero());
  CHECK(y0.generators() == w.transpose());

  const Network relu = relu_scalar();
  const Hyperbox r1(vec({0.5}), vec({1.5}));
  LayerTrace t1 = forward_pass(relu, r1, SetDomain::kZono);
  backward_pass(relu, t1, SetDomain::kZono);
  const auto& yr = std::get<Zonotope>(t1.cotangents.front());
  REQUIRE(yr.num_generators() == 2);
  CHECK(yr.generators()(0, 0) == doctest::Approx(0.5));
  CHECK(yr.generators()(0, 1) == doctest::Approx(0.5));
  const Hyperbox hr = zono_interval_hull(yr);
  CHECK(hr.lower()(0) == doctest::Approx(-1));
  CHECK(hr.upper()(0) == doctest::Approx(1));

  LayerTrace bad = forward_pass(relu, r1, SetDomain::kZono);
  bad.forward.pop_back();
  CHECK_THROWS_AS(backward_pass(relu, bad, SetDomain::kZono), InvariantError);
}

TEST_CASE("sampled vjps lie in every backward set") {
  Rng rng(77);
  for (Activation act : {Activation::kRelu, Activation::kTanh, Activation::kSigmoid}) {
    for (const char* label : {"ZZ", "HH", "HZ", "ZH"}) {
      RandomNetSpec spec{{3, 6, 6, 3}, act, 1.0, act == Activation::kRelu ? std::nullopt
                                                                     : std::optional{act}};
      const Network net = gen_random_net(spec, 9);
      const Hyperbox region(oracle::random_vector(rng, 3), Vector::Constant(3, 0.3));
      const DomainChoice d = *DomainChoice::parse(label);
      LayerTrace tr = forward_pass(net, region, d.forward);
      backward_pass(net, tr, d.backward);
      const Hyperbox final_hull = interval_hull(tr.cotangents.front());
      for (int s = 0; s < 1000; ++s) {
        const Vector x = region.center() + region.radius().cwiseProduct(oracle::random_coeffs(rng, 3));
        Vector u(3);
        for (int i = 0; i < 3; ++i) u(i) = rng.sign();
        CHECK(final_hull.contains(vjp(net, x, u).gradient, 1e-9));
      }
    }
  }
}

TEST_CASE("zlip examples") {
  Matrix w(2, 2);
  w << 1, 2, 3, 4;
  const Network aff(2, {AffineLayer{w, Vector::Zero(2)}});
  const Hyperbox region(vec({0.3, -1}), vec({2, 0.1}));
  for (NormMethod m : {NormMethod::kExact, NormMethod::kLp}) {
    ZLipOptions o;
    o.norm_method = m;
    CHECK(zlip(aff, region, o).bound == doctest::Approx(10));
  }
  ZLipOptions ex;
  ex.norm_method = NormMethod::kExact;
  CHECK(zlip(relu_scalar(), Hyperbox(vec({0.5}), vec({1.5})), ex).bound == doctest::Approx(1.0));

  Rng rng(78);
  for (int t = 0; t < 10; ++t) {
    RandomNetSpec spec{{3, 12, 12, 12, 2}, Activation::kRelu, 1.0, std::nullopt};
    const Network net = gen_random_net(spec, 100 + t);
    const Hyperbox r(oracle::random_vector(rng, 3), Vector::Constant(3, 0.1));
    ZLipOptions zz, hh;
    hh.domain = {SetDomain::kBox, SetDomain::kBox};
    const LipschitzReport rz = zlip(net, r, zz);
    const LipschitzReport rh = zlip(net, r, hh);
    const double lb = sampled_lower_bound(net, r, 200, t);
    CHECK(rz.bound >= lb * (1 - 1e-12));
    CHECK(rh.bound >= lb * (1 - 1e-12));
    CHECK(rz.forward_generators.size() == net.size() + 1);
    CHECK(rh.forward_generators.back() == 0);
  }
}

TEST_CASE("zlip on a point region matches the Jacobian norm") {
  RandomNetSpec spec{{3, 5, 2}, Activation::kTanh, 1.0, std::nullopt};
  const Network net = gen_random_net(spec, 3);
  const Vector c = vec({0.1, 0.2, -0.3});
  ZLipOptions o;
  o.norm_method = NormMethod::kExact;
  const double b = zlip(net, Hyperbox::point(c), o).bound;
  CHECK(b == doctest::Approx(oracle::inf_to_1(jacobian(net, c))).epsilon(1e-6));
}

TEST_CASE("radius monotonicity on a small fixture") {
  RandomNetSpec spec{{2, 8, 8, 2}, Activation::kSigmoid, 1.0, std::nullopt};
  const Network net = gen_random_net(spec, 4);
  for (const char* label : {"ZZ", "HH", "HZ", "ZH"}) {
    ZLipOptions o;
    o.domain = *DomainChoice::parse(label);
    double prev = 0;
    for (double r : {0.01, 0.05, 0.1, 0.25, 0.5, 1.0}) {
      const double b = zlip(net, Hyperbox(Vector::Zero(2), Vector::Constant(2, r)), o).bound;
      CHECK(b >= prev - 1e-9);
      prev = b;
    }
  }
}
