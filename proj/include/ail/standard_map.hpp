#pragma once

#include <utility>
#include <vector>

#include "ail/symbolic.hpp"

namespace ail::smap {

// x_+ = 2x - x_- + coupling * sin(x); the closed-form specialization of the
// general shadowing machinery.  coupling may be negative.
struct Params {
  double coupling = 0.0;
  double sigma = 0.0;
  double Lambda = 0.0;
  double tol = 1e-12;
  int max_iterations = 10000;
};

// Coupling threshold above which shadowing is certified for codes with
// second differences bounded by Lambda inside sigma-strips.
double lambda0(double Lambda, double sigma);

std::pair<double, double> map_forward(double x, double y, double coupling);

double step_lagrangian(double x_prev, double x, double coupling);

struct Orbit {
  symbolic::StandardCode code;
  std::vector<double> points;
  double rho = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double contraction_estimate = 0.0;
  bool converged = false;
};

// Sup of |x_{k+1} - 2 x_k + x_{k-1} - coupling*sin(x_k)| over interior
// indices (all indices, cyclically, when periodic).
double residual_sml(const std::vector<double>& points, double coupling,
                    bool periodic);

// Contraction sweeps on the arcsin branches through each strip center.
// Window codes keep both end points pinned.
Orbit shadow_code(const symbolic::StandardCode& code, const Params& params);

struct DecayReport {
  double ratio = 0.0;
  long long worst_index = 0;
  bool pass = false;
};

// Shadows both codes (which must agree for |index| <= n) and compares the
// pointwise orbit separation against the geometric locality bound
// 2*sigma*5^(|k|-n).
DecayReport decay_check(const symbolic::StandardCode& a,
                        const symbolic::StandardCode& b, long long n,
                        const Params& params);

// Window code from one cycle of second-difference multiples, integrated both
// ways from m_0 = m_1 = 0; indices -half_width .. half_width.
symbolic::StandardCode window_from_cycle(const std::vector<long long>& beta,
                                         long long half_width);

// Consecutive pairs reduced mod 2*pi into [0, 2*pi).
std::vector<std::pair<double, double>> quotient_project(const Orbit& orbit);

}  // namespace ail::smap
