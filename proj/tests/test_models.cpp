#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ail/dls.hpp"
#include "ail/hyperbolicity.hpp"
#include "ail/models.hpp"
#include "ail/standard_map.hpp"
#include "ail/symbolic.hpp"

using ail::CertificationError;
using ail::Error;
namespace dls = ail::dls;
namespace sym = ail::symbolic;
using namespace ail::models;

namespace {

constexpr double kPi = std::numbers::pi;

dls::Vec one(double v) {
  dls::Vec x(1);
  x << v;
  return x;
}

Potential cos_unscaled() {
  Potential p;
  p.f = [](double x) { return std::cos(x); };
  p.df = [](double x) { return -std::sin(x); };
  p.d2f = [](double x) { return -std::cos(x); };
  return p;
}

Potential neg_cos_unscaled() {
  Potential p;
  p.f = [](double x) { return -std::cos(x); };
  p.df = [](double x) { return std::sin(x); };
  p.d2f = [](double x) { return std::cos(x); };
  return p;
}

SepMapSpec sep_spec(double c1 = 10.0) {
  SepMapSpec spec;
  spec.lambda_s = 1.0;
  spec.V = {builtin_potential("neg_cos"), builtin_potential("neg_cos")};
  spec.c1 = c1;
  spec.seeds = {std::vector<double>{0.0, 0.5}, std::vector<double>{0.0, 0.5}};
  return spec;
}

// Random admissible separatrix vertex path with chained sign labels.
std::vector<int> sep_path(const SepSystem& sys, std::mt19937_64& rng, int n) {
  std::vector<int> vertices;
  int sigma = (rng() % 2) ? 1 : -1;
  for (int i = 0; i <= n; ++i) {
    long long k = 10 + static_cast<long long>(rng() % 11);
    int theta = (rng() % 2) ? 1 : -1;
    int v = sys.vertex_for(k, sigma, theta);
    REQUIRE(v >= 0);
    vertices.push_back(v);
    sigma *= theta;
  }
  return vertices;
}

}  // namespace

TEST_CASE("builtin potentials differentiate consistently") {
  const double h = 1e-6;
  for (const char* name : {"cos", "neg_cos", "two_well"}) {
    auto p = builtin_potential(name);
    for (double x : {0.1, 0.37, 0.62, 0.9}) {
      double fd1 = (p.f(x + h) - p.f(x - h)) / (2 * h);
      double fd2 = (p.df(x + h) - p.df(x - h)) / (2 * h);
      CHECK(p.df(x) == doctest::Approx(fd1).epsilon(1e-5));
      CHECK(p.d2f(x) == doctest::Approx(fd2).epsilon(1e-5));
    }
    CHECK(p.f(0.25) == doctest::Approx(p.f(1.25)).epsilon(1e-12));
  }
  CHECK_THROWS_WITH_AS(builtin_potential("sine"), "unknown potential: sine",
                       Error);
}

TEST_CASE("periodic spline reproduces a smooth profile") {
  std::vector<double> samples;
  for (int i = 0; i < 32; ++i)
    samples.push_back(std::sin(2 * kPi * i / 32.0));
  PeriodicCubicSpline s(samples);
  for (double x = 0.0; x < 1.0; x += 0.013) {
    CHECK(std::abs(s.value(x) - std::sin(2 * kPi * x)) < 1e-4);
    CHECK(std::abs(s.deriv(x) - 2 * kPi * std::cos(2 * kPi * x)) < 1e-2);
    CHECK(std::abs(s.deriv2(x) + 4 * kPi * kPi * std::sin(2 * kPi * x)) < 0.5);
  }
  CHECK(s.value(1.4) == doctest::Approx(s.value(0.4)).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(PeriodicCubicSpline({0.0, 1.0}),
                       "spline needs at least 3 samples", Error);
}

TEST_CASE("kick map sites are lifted wall wells") {
  auto ks = make_kick_map(KickMapSpec::scalar(0.01, builtin_potential("cos")));
  REQUIRE(ks.sites.size() == 14);  // two wells per cell, shifts 3
  for (std::size_t i = 1; i < ks.sites.size(); ++i)
    CHECK(ks.sites[i](0) - ks.sites[i - 1](0) ==
          doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ks.site_near(one(0.0)) >= 0);
  CHECK(ks.sites[ks.site_near(one(0.0))](0) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(ks.site_near(one(0.2)) == -1);

  int s0 = ks.site_near(one(0.0));
  int s1 = ks.site_near(one(0.5));
  CHECK(ks.vertex_for(s0, s1) >= 0);
  auto code = ks.code_for({s0, s1}, true);
  CHECK(sym::is_admissible(code, ks.system.graph()));

  // The two-well potential hides two further wells between the seeds.
  auto tw = make_kick_map(KickMapSpec::scalar(
      0.01, builtin_potential("two_well"), 1.0, {0.0, 0.25, 0.5, 0.75}));
  CHECK(tw.sites.size() == 28);

  CHECK_THROWS_WITH_AS(ks.code_for({}, true), "empty site path", Error);
  CHECK_THROWS_WITH_AS(ks.code_for({0, 13}, true),
                       "site pair exceeds pair distance", Error);
}

TEST_CASE("kick map input validation") {
  auto base = KickMapSpec::scalar(0.01, builtin_potential("cos"));

  auto bad_dim = base;
  bad_dim.dim = 0;
  CHECK_THROWS_WITH_AS(make_kick_map(bad_dim), "dimension must be positive",
                       Error);

  auto no_v = base;
  no_v.V = nullptr;
  CHECK_THROWS_WITH_AS(make_kick_map(no_v), "potential evaluators missing",
                       Error);

  auto bad_b = base;
  bad_b.B = dls::Mat::Identity(2, 2);
  CHECK_THROWS_WITH_AS(make_kick_map(bad_b), "B dimension mismatch", Error);

  auto asym = base;
  asym.dim = 2;
  asym.lattice = dls::Vec::Ones(2);
  asym.B = dls::Mat::Zero(2, 2);
  asym.B(0, 1) = 1.0;
  CHECK_THROWS_WITH_AS(make_kick_map(asym), "B not symmetric", Error);

  auto bad_lattice = base;
  bad_lattice.lattice = dls::Vec::Ones(2);
  CHECK_THROWS_WITH_AS(make_kick_map(bad_lattice),
                       "lattice dimension mismatch", Error);

  auto neg_lattice = base;
  neg_lattice.lattice = one(-1.0);
  CHECK_THROWS_WITH_AS(make_kick_map(neg_lattice),
                       "lattice periods must be positive", Error);

  // Cubed sine has only a flat critical point at the seed.
  Potential flat;
  flat.f = [](double x) { return std::pow(std::sin(2 * kPi * x), 3); };
  flat.df = [](double x) {
    return 6 * kPi * std::pow(std::sin(2 * kPi * x), 2) * std::cos(2 * kPi * x);
  };
  flat.d2f = [](double x) {
    const double s = std::sin(2 * kPi * x);
    const double c = std::cos(2 * kPi * x);
    return 12 * kPi * kPi * s * (2 * c * c - s * s);
  };
  CHECK_THROWS_WITH_AS(
      make_kick_map(KickMapSpec::scalar(0.01, flat, 1.0, {0.0})),
      "model not anti-integrable", Error);
}

TEST_CASE("uncoupled kick map shadows sit exactly on the wells") {
  auto ks = make_kick_map(KickMapSpec::scalar(0.0, builtin_potential("cos")));
  int s0 = ks.site_near(one(0.0));
  int s1 = ks.site_near(one(0.5));
  auto orbit = dls::shadow(ks.system, ks.code_for({s0, s1, s0, s1}, true));
  CHECK(orbit.converged);
  CHECK(orbit.iterations == 1);
  CHECK(orbit.rho == 0.0);
  CHECK(orbit.points[0](0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(orbit.points[1](0) == doctest::Approx(0.5).epsilon(1e-12));

  const auto& e = ks.system.graph().edge(orbit.code.edges[0]);
  auto twist = dls::twist_matrix(ks.system.piece(e.dst), orbit.points[0],
                                 orbit.points[1]);
  CHECK_FALSE(twist.nondegenerate);

  auto coupled = make_kick_map(KickMapSpec::scalar(0.01, builtin_potential("cos")));
  const auto& e2 = coupled.system.graph().edge(0);
  auto twist2 = dls::twist_matrix(coupled.system.piece(e2.dst), one(0.0),
                                  one(0.5));
  CHECK(twist2.nondegenerate);
  CHECK(twist2.B(0, 0) == doctest::Approx(-0.01));
}

TEST_CASE("kick map derivatives pass the finite-difference audit") {
  auto ks = make_kick_map(KickMapSpec::scalar(0.025, builtin_potential("cos")));
  CHECK(dls::max_derivative_mismatch(ks.system.piece(0)) <= 1e-6);
}

TEST_CASE("scalar kick maps reproduce the standard map") {
  // L(x, y) = eps2 (x - y)^2 / 2 - V(y) on a 2*pi lattice turns the
  // second-order equation into x'' = sin(x)/eps2.
  const double eps2 = 0.025;
  auto plus = make_kick_map(
      KickMapSpec::scalar(eps2, cos_unscaled(), 2 * kPi, {0.0, kPi}));
  auto minus = make_kick_map(
      KickMapSpec::scalar(eps2, neg_cos_unscaled(), 2 * kPi, {0.0, kPi}));
  REQUIRE(plus.sites.size() == 14);

  auto site_of = [&](const KickSystem& ks, long long m) {
    int s = ks.site_near(one(kPi * static_cast<double>(m)), 1e-6);
    REQUIRE(s >= 0);
    return s;
  };

  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    sym::StandardCode sc;
    for (int i = 0; i < n; ++i)
      sc.multiples.push_back(static_cast<long long>(rng() % 3) - 1);

    const bool negative = trial % 2 == 1;
    const auto& ks = negative ? minus : plus;
    const double lambda = negative ? -1.0 / eps2 : 1.0 / eps2;

    std::vector<int> path;
    for (long long m : sc.multiples) path.push_back(site_of(ks, m));
    auto orbit = dls::shadow(ks.system, ks.code_for(path, true));

    ail::smap::Params prm;
    prm.coupling = lambda;
    prm.sigma = kPi / 4;
    auto reference = ail::smap::shadow_code(sc, prm);

    REQUIRE(orbit.converged);
    REQUIRE(reference.converged);
    REQUIRE(orbit.points.size() == reference.points.size());
    for (std::size_t i = 0; i < orbit.points.size(); ++i)
      CHECK(orbit.points[i](0) ==
            doctest::Approx(reference.points[i]).epsilon(1e-9));
  }
}

TEST_CASE("narrow strips are rejected") {
  StripBilliardSpec spec;
  spec.lower = cosine_wall(0.6);
  spec.upper = cosine_wall(0.6);
  spec.width = 2.0;
  CHECK_THROWS_WITH_AS(make_strip_billiard(spec),
                       "strip width invariant violated: |f| + 1 >= width/4",
                       Error);
}

TEST_CASE("wavy strip billiard orbits satisfy the reflection law") {
  StripBilliardSpec spec;
  spec.lower = cosine_wall(0.1);
  spec.upper = cosine_wall(0.07);
  spec.width = 50.0;
  auto bs = make_strip_billiard(spec);
  REQUIRE(bs.lower_sites.size() == 14);
  REQUIRE(bs.upper_sites.size() == 14);

  auto lower_at = [&](double p) {
    for (std::size_t i = 0; i < bs.lower_sites.size(); ++i)
      if (std::abs(bs.lower_sites[i] - p) < 1e-9) return static_cast<int>(i);
    return -1;
  };
  const int l0 = lower_at(0.0);
  REQUIRE(l0 >= 0);

  // Vertical bounce.
  auto code2 = bs.code_for(0, {l0, l0}, true);
  auto bounce = dls::shadow(bs.system, code2);
  CHECK(bounce.converged);
  CHECK(bounce.residual <= 1e-10);
  CHECK(reflection_check(bs, bounce) <= 1e-8);
  CHECK(bs.wall_of_point(bounce.code, 0) == 0);
  CHECK(bs.wall_of_point(bounce.code, 1) == 1);

  // Zigzag over neighboring wells.
  auto code4 = bs.code_for(0, {l0, l0 + 1, l0 + 2, l0 + 1}, true);
  auto zig = dls::shadow(bs.system, code4);
  CHECK(zig.converged);
  CHECK(zig.residual <= 1e-10);
  CHECK(reflection_check(bs, zig) <= 1e-8);
  // Impact points sit within O(1/(width * hess)) of their wells.
  CHECK(std::abs(zig.points[0](0)) <= 6e-3);
  CHECK(std::abs(zig.points[1](0) - 0.5) <= 6e-3);
  CHECK(std::abs(zig.points[2](0) - 1.0) <= 6e-3);

  // The certified cone criterion holds along the bounce.
  auto blocks = ail::hyperbolicity::variational_blocks(bs.system, bounce);
  auto cone = ail::hyperbolicity::cone_verify(blocks);
  CHECK(cone.pass);
  CHECK(cone.tier == "scalar-exact");
  CHECK(cone.mu_measured >= 2.0);

  // Window codes pin the end impacts.
  auto win = bs.code_for(0, {l0, l0 + 1, l0}, false);
  auto worbit = dls::shadow(bs.system, win);
  CHECK(worbit.converged);
  CHECK(reflection_check(bs, worbit) <= 1e-8);

  CHECK(dls::max_derivative_mismatch(bs.system.piece(0)) <= 1e-6);

  CHECK_THROWS_WITH_AS(bs.code_for(0, {l0, l0 + 1, l0}, true),
                       "periodic billiard path must have even length", Error);

  dls::Orbit stub;
  stub.code = sym::Code::periodic({0});
  stub.points = {one(0.0)};
  CHECK_THROWS_WITH_AS(reflection_check(bs, stub), "orbit too short", Error);
}

TEST_CASE("flat walls only build without certification") {
  StripBilliardSpec spec;
  spec.lower = flat_wall();
  spec.upper = flat_wall();
  spec.width = 50.0;
  CHECK_THROWS_WITH_AS(make_strip_billiard(spec), "degenerate critical point",
                       CertificationError);

  spec.certify = false;
  auto bs = make_strip_billiard(spec);
  REQUIRE(bs.lower_sites.size() == 14);  // raw seeds, lifted
  CHECK(bs.lower_sites[6] == doctest::Approx(0.0));
  CHECK(bs.system.graph().vertices().size() > 0);
  CHECK_FALSE(bs.system.has_edge_data(bs.system.graph().edges()[0].id));
}

TEST_CASE("spline walls behave like their analytic counterparts") {
  std::vector<double> samples;
  for (int i = 0; i < 32; ++i)
    samples.push_back(0.1 * std::cos(2 * kPi * i / 32.0));
  StripBilliardSpec spec;
  spec.lower = spline_wall(samples, {0.0, 0.5});
  spec.upper = cosine_wall(0.07);
  spec.width = 50.0;
  auto bs = make_strip_billiard(spec);
  auto code = bs.code_for(0, {6, 6}, true);
  auto orbit = dls::shadow(bs.system, code);
  CHECK(orbit.converged);
  CHECK(reflection_check(bs, orbit) <= 1e-7);
}

TEST_CASE("separatrix systems label vertices by jump and signs") {
  auto ss = make_sepmap(sep_spec());
  CHECK(ss.vertex_info.size() == 44);  // 11 jumps x 4 sign pairs
  CHECK(ss.wells[0].size() == 2);
  CHECK(ss.wells[1].size() == 2);

  int v = ss.vertex_for(10, 1, -1);
  REQUIRE(v >= 0);
  CHECK(ss.vertex_info[v].k == 10);
  CHECK(ss.vertex_info[v].sigma == 1);
  CHECK(ss.vertex_info[v].theta == -1);
  CHECK(ss.vertex_for(9, 1, 1) == -1);
  CHECK(ss.vertex_for(10, 0, 1) == -1);

  // Transitions must chain sigma' = sigma * theta.
  int src = ss.vertex_for(12, 1, -1);
  int good = ss.vertex_for(15, -1, 1);
  int bad = ss.vertex_for(15, 1, 1);
  CHECK(ss.edge_for(src, good, 0) >= 0);
  CHECK(ss.edge_for(src, good, 1) >= 0);
  CHECK(ss.edge_for(src, bad, 0) == -1);
}

TEST_CASE("separatrix orbits satisfy the generating relations") {
  auto spec = sep_spec();
  auto ss = make_sepmap(spec);
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 6 + static_cast<int>(rng() % 4);
    auto vertices = sep_path(ss, rng, n);
    std::vector<int> edges;
    for (int i = 0; i + 1 <= n; ++i) {
      int e = ss.edge_for(vertices[i], vertices[i + 1],
                          static_cast<int>(rng() % 2));
      REQUIRE(e >= 0);
      edges.push_back(e);
    }
    auto orbit = dls::shadow(ss.system, sym::Code::window(edges));
    REQUIRE(orbit.converged);
    CHECK(orbit.residual <= 1e-8);

    auto rep = sepmap_generating_check(ss, orbit, spec);
    CHECK(rep.max_defect <= 1e-8);
    CHECK(rep.labels_ok);
  }
}

TEST_CASE("separatrix map with shifted phases and faster rate") {
  auto spec = sep_spec();
  spec.lambda_s = 1.3;
  spec.omega_hat = {0.2, -0.1};
  auto ss = make_sepmap(spec);
  std::mt19937_64 rng(78);
  auto vertices = sep_path(ss, rng, 8);
  std::vector<int> edges;
  for (int i = 0; i + 1 <= 8; ++i)
    edges.push_back(ss.edge_for(vertices[i], vertices[i + 1], 0));
  auto orbit = dls::shadow(ss.system, sym::Code::window(edges));
  REQUIRE(orbit.converged);
  auto rep = sepmap_generating_check(ss, orbit, spec);
  CHECK(rep.max_defect <= 1e-8);
  CHECK(rep.labels_ok);

  CHECK(dls::max_derivative_mismatch(ss.system.piece(0)) <= 1e-6);
}

TEST_CASE("dropping the coupling gives the exact anti-integrable limit") {
  auto spec = sep_spec();
  spec.drop_coupling = true;
  auto ss = make_sepmap(spec);
  std::mt19937_64 rng(79);
  auto vertices = sep_path(ss, rng, 6);
  std::vector<int> edges;
  for (int i = 0; i + 1 <= 6; ++i)
    edges.push_back(ss.edge_for(vertices[i], vertices[i + 1], 1));
  auto orbit = dls::shadow(ss.system, sym::Code::window(edges));
  CHECK(orbit.iterations == 1);
  CHECK(orbit.rho == 0.0);

  auto blocks = ail::hyperbolicity::variational_blocks(ss.system, orbit);
  auto cone = ail::hyperbolicity::cone_verify(blocks);
  CHECK(cone.pass);
  CHECK(cone.tier == "ai-limit-degenerate");
}

TEST_CASE("small jumps break the uniformity condition") {
  CHECK_THROWS_WITH_AS(make_sepmap(sep_spec(0.1)),
                       "uniformity condition violated", CertificationError);
}

TEST_CASE("separatrix input validation") {
  auto bad = sep_spec();
  bad.lambda_s = 0.0;
  CHECK_THROWS_WITH_AS(make_sepmap(bad), "lambda_s must be positive", Error);

  auto neg = sep_spec();
  neg.c1 = 0.0;
  CHECK_THROWS_WITH_AS(make_sepmap(neg), "c1 must be positive", Error);

  auto inverted = sep_spec();
  inverted.c2 = 5.0;
  CHECK_THROWS_WITH_AS(make_sepmap(inverted), "c2 must be at least c1", Error);

  auto empty = sep_spec();
  empty.c1 = 10.2;
  empty.c2 = 10.4;
  CHECK_THROWS_WITH_AS(make_sepmap(empty), "no admissible jumps", Error);
}
