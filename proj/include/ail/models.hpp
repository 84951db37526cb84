#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ail/dls.hpp"

namespace ail::models {

using dls::Mat;
using dls::Vec;

// Scalar 1-periodic potential with two derivatives.
struct Potential {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

// Named potentials: "cos", "neg_cos", "two_well" (all 1-periodic).
Potential builtin_potential(const std::string& name);

// Periodic natural cubic spline through equally spaced samples on [0,1);
// used for user-tabulated wall profiles.
class PeriodicCubicSpline {
 public:
  explicit PeriodicCubicSpline(std::vector<double> samples);
  double value(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;

 private:
  std::vector<double> y_;
  std::vector<double> m_;
  std::size_t n_ = 0;
};

// ---------------------------------------------------------------------------
// Kick map: L(x, y) = <B(x - y), x - y>/2 - V(y), B = eps2 * I by default.

struct KickMapSpec {
  int dim = 1;
  double eps2 = 0.01;
  // Optional explicit mass matrix; empty means eps2 * identity.  Must be
  // symmetric and, for a twist map, nondegenerate.
  Mat B;
  std::function<double(const Vec&)> V;
  std::function<Vec(const Vec&)> grad_V;
  std::function<Mat(const Vec&)> hess_V;
  // Per-coordinate periods of V.
  Vec lattice;
  std::vector<Vec> seeds;
  // Lifting: lattice translations with |k|_inf <= shifts.
  int shifts = 3;
  // Maximum distance between consecutive wells; NaN = shifts * min period.
  double pair_distance = std::numeric_limits<double>::quiet_NaN();

  static KickMapSpec scalar(double eps2, const Potential& v,
                            double lattice = 1.0,
                            std::vector<double> seeds = {});
};

struct KickSystem {
  dls::DlsSystem system;
  // Lifted critical points of V (the wells), indexed by site id.
  std::vector<Vec> sites;
  // Vertex id -> (site of the left point, site of the right point).
  std::vector<std::pair<int, int>> vertex_sites;

  // Vertex visiting site a then site b; -1 when absent.
  int vertex_for(int site_a, int site_b) const;
  // Code visiting the given site sequence.
  symbolic::Code code_for(const std::vector<int>& site_path, bool periodic) const;
  // Site whose well is nearest to the given point; -1 when none is close.
  int site_near(const Vec& x, double tol = 1e-6) const;
};

KickSystem make_kick_map(const KickMapSpec& spec);

// ---------------------------------------------------------------------------
// Billiard in a wide strip between wall graphs y = f1(x) and y = d + f2(x).

struct WallProfile {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  std::vector<double> seeds;
};

WallProfile cosine_wall(double amplitude, std::vector<double> seeds = {0.0,
                                                                       0.5});
WallProfile flat_wall(std::vector<double> seeds = {0.0, 0.5});
WallProfile spline_wall(std::vector<double> samples,
                        std::vector<double> seeds);

struct StripBilliardSpec {
  WallProfile lower;
  WallProfile upper;
  double width = 50.0;
  int shifts = 3;
  double pair_distance = std::numeric_limits<double>::quiet_NaN();
  // Skip critical-point certification (flat or one-sided walls have
  // degenerate one-step generating functions; orbits still exist and can be
  // refined by the stacked Newton solver).
  bool certify = true;
};

struct StripSystem {
  dls::DlsSystem system;
  double width = 0.0;
  // Site positions per wall (lifted wall critical points or raw seeds).
  std::vector<double> lower_sites;
  std::vector<double> upper_sites;
  // Vertex id -> {type (0: lower->upper, 1: upper->lower), src site, dst site}.
  struct VertexInfo {
    int type;
    int src_site;
    int dst_site;
  };
  std::vector<VertexInfo> vertex_info;
  WallProfile lower;
  WallProfile upper;

  int vertex_for(int type, int src_site, int dst_site) const;
  // Code from alternating site indices, starting on the given wall
  // (0 = lower).  sites[i] indexes lower_sites or upper_sites as the parity
  // of the step dictates.
  symbolic::Code code_for(int start_wall, const std::vector<int>& sites,
                          bool periodic) const;
  // Wall carrying orbit point i (0 = lower, 1 = upper).
  int wall_of_point(const symbolic::Code& code, std::size_t i) const;
};

StripSystem make_strip_billiard(const StripBilliardSpec& spec);

// Geometric reflection-law defect: sup over impact points of the difference
// between incidence and reflection angles against the wall tangent.
double reflection_check(const StripSystem& sys, const dls::Orbit& orbit);

// ---------------------------------------------------------------------------
// Separatrix map in Lagrangian form: pieces indexed by (jump k, sigma,
// theta) with coupling theta * exp(lambda_s * (y - x - k - omega_hat)).

struct SepMapSpec {
  double lambda_s = 1.0;
  // Indexed by (sigma + 1) / 2: [0] for sigma = -1, [1] for sigma = +1.
  std::array<double, 2> omega_hat = {0.0, 0.0};
  std::array<Potential, 2> V;
  double c1 = 10.0;
  // Largest jump; NaN = c1 + 10.
  double c2 = std::numeric_limits<double>::quiet_NaN();
  std::array<std::vector<double>, 2> seeds;
  // Drop the exponential coupling entirely (exact anti-integrable limit).
  bool drop_coupling = false;
};

struct SepSystem {
  dls::DlsSystem system;
  double lambda_s = 0.0;
  std::array<double, 2> omega_hat = {0.0, 0.0};
  struct VertexInfo {
    long long k;
    int sigma;
    int theta;
  };
  std::vector<VertexInfo> vertex_info;
  // Critical points of V_sigma, indexed like spec.seeds.
  std::array<std::vector<double>, 2> wells;

  int vertex_for(long long k, int sigma, int theta) const;
  // Edge src -> dst landing on the given well of V_{sigma(dst)}.
  int edge_for(int src_vertex, int dst_vertex, int well) const;
};

SepSystem make_sepmap(const SepMapSpec& spec);

struct SepCheckReport {
  double max_defect = 0.0;
  bool labels_ok = true;
};

// Independent check of the separatrix-map generating relations: momenta
// reconstructed from the Lagrangian must satisfy the map equations
//   y_+ = y + lambda_s * V'_sigma(x),  x_+ = x + (omega + log|y_+|)/lambda_s
// with omega = lambda_s * omega_hat - log(lambda_s^2), plus the sign labels.
SepCheckReport sepmap_generating_check(const SepSystem& sys,
                                       const dls::Orbit& orbit,
                                       const SepMapSpec& spec);

}  // namespace ail::models
