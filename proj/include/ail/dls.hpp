#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ail/symbolic.hpp"

namespace ail::dls {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Axis-aligned box, the domain of one configuration variable.
struct Box {
  Vec lo;
  Vec hi;

  static Box cube(int dim, double lo, double hi);
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x, double slack = 0.0) const;
  Vec center() const { return 0.5 * (lo + hi); }
  Vec clamp(const Vec& x) const;
};

// One piece of a discrete Lagrangian, split as
//   L(x, y) = vm(x) + vp(y) + u(x, y)
// with u the (small) coupling term.  All callbacks must be defined on
// dom_x x dom_y.  Hessian blocks: hess_u_xy has rows indexed by x and
// columns by y.
struct LagrangianPiece {
  int dim = 1;
  Box dom_x;
  Box dom_y;

  std::function<double(const Vec&)> vm;
  std::function<double(const Vec&)> vp;
  std::function<Vec(const Vec&)> grad_vm;
  std::function<Vec(const Vec&)> grad_vp;
  std::function<Mat(const Vec&)> hess_vm;
  std::function<Mat(const Vec&)> hess_vp;

  std::function<double(const Vec&, const Vec&)> u;
  std::function<Vec(const Vec&, const Vec&)> grad_u_x;
  std::function<Vec(const Vec&, const Vec&)> grad_u_y;
  std::function<Mat(const Vec&, const Vec&)> hess_u_xx;
  std::function<Mat(const Vec&, const Vec&)> hess_u_xy;
  std::function<Mat(const Vec&, const Vec&)> hess_u_yy;

  double L(const Vec& x, const Vec& y) const;
  Vec grad_x(const Vec& x, const Vec& y) const;
  Vec grad_y(const Vec& x, const Vec& y) const;
};

// Data attached to one transition edge: the critical point of the decoupled
// one-step generating function and the uniformity ball around it.
struct EdgeData {
  int edge_id = -1;
  Vec critical_point;
  Mat hessian;
  double radius = 0.0;
  double lip_phi = 0.0;
};

struct UniformityReport {
  double r_min = 0.0;
  double lip_max = 0.0;
  double eps = 0.0;
  double du_sup = 0.0;
  double contraction_bound = 0.0;
  bool satisfied = false;
};

// A discrete Lagrangian system over a transition graph.  Vertices label
// pieces; edges label transitions with nondegenerate critical points.
class DlsSystem {
 public:
  DlsSystem() = default;
  DlsSystem(int dim, symbolic::TransitionGraph graph,
            std::vector<LagrangianPiece> pieces);

  int dim() const { return dim_; }
  const symbolic::TransitionGraph& graph() const { return graph_; }
  const LagrangianPiece& piece(int vertex) const;

  // One-step generating function for edge e: psi(x) = vp_src(x) + vm_dst(x),
  // defined where both factors are.
  double psi(int edge_id, const Vec& x) const;
  Vec grad_psi(int edge_id, const Vec& x) const;
  Mat hess_psi(int edge_id, const Vec& x) const;
  Box psi_domain(int edge_id) const;

  void set_edge_data(int edge_id, EdgeData data);
  const EdgeData& edge_data(int edge_id) const;
  bool has_edge_data(int edge_id) const;

  // Labels for reporting; optional.
  void set_vertex_label(int vertex, std::string label);
  std::string vertex_label(int vertex) const;

 private:
  int dim_ = 0;
  symbolic::TransitionGraph graph_;
  std::vector<LagrangianPiece> pieces_;
  std::map<int, EdgeData> edge_data_;
  std::map<int, std::string> labels_;
};

struct ShadowConfig {
  // Uniqueness-ball radius; NaN means half the smallest uniformity radius.
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double tol = 1e-12;
  int max_iterations = 10000;
  // Tolerance for the inner one-point solves.
  double inner_tol = 1e-13;
  double fd_step = 1e-6;
};

struct Orbit {
  symbolic::Code code;
  std::vector<Vec> points;
  double rho = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double contraction_estimate = 0.0;
  double rho_bound = 0.0;
  bool converged = false;
};

// Critical point of psi on the given edge by a damped Newton iteration from
// seed, with a certified uniformity ball.  Throws CertificationError
// ("degenerate critical point") when the Hessian is numerically singular.
EdgeData find_critical_point(const DlsSystem& sys, int edge_id,
                             const Vec& seed, double r_cap);

// Convenience: seeds at the psi-domain center, caps at half its width.
EdgeData find_critical_point(const DlsSystem& sys, int edge_id);

// Fills edge data for every edge of the system in place.
void find_all_critical_points(DlsSystem& sys);

// Solves grad psi(x) = w near the critical point of the edge; the local
// inverse of the gradient on the uniformity ball.  Throws CertificationError
// ("phi outside uniformity ball") when the solution leaves it.
Vec phi_eval(const DlsSystem& sys, int edge_id, const Vec& w,
             double tol = 1e-13);

// Sampled uniformity/smallness report over the whole system.  Deterministic
// (fixed sampling seed).  The satisfied flag compares the contraction bound
// against cfg.sigma (defaulting to half the smallest ball radius) and 1/2.
UniformityReport uniformity_report(const DlsSystem& sys,
                                   const ShadowConfig& cfg = {},
                                   int samples = 100);

// The contraction operator: from the trivial configuration at the critical
// points, iterate simultaneous one-point updates until the step is below
// tol.  Window codes pin both end points to their critical points.
Orbit shadow(const DlsSystem& sys, const symbolic::Code& code,
             const ShadowConfig& cfg = {});

// Same, from a caller-supplied initial configuration.
Orbit shadow_from(const DlsSystem& sys, const symbolic::Code& code,
                  std::vector<Vec> initial, const ShadowConfig& cfg = {});

// Sup-norm of the discrete Euler-Lagrange gradient along the orbit.
// Window codes exclude the pinned end points.
double residual(const DlsSystem& sys, const Orbit& orbit);
std::vector<double> local_residuals(const DlsSystem& sys, const Orbit& orbit);

// Total action of a window orbit: sum of L over consecutive pairs.
double action_window(const DlsSystem& sys, const Orbit& orbit);

// Mixed second derivative block of the coupling at a configuration pair;
// the twist form of the transition.  Returns the matrix and whether it is
// nondegenerate.
struct TwistInfo {
  Mat B;
  bool nondegenerate = false;
};
TwistInfo twist_matrix(const LagrangianPiece& piece, const Vec& x,
                       const Vec& y);

// Dense Newton on the stacked Euler-Lagrange system; independent check of
// the contraction operator.  Window codes keep the pinned ends fixed.
Orbit newton_shadow(const DlsSystem& sys, const symbolic::Code& code,
                    std::vector<Vec> initial, int max_iter = 50,
                    double tol = 1e-12);

// Shifts a scalar gauge function f between the two one-point potentials of
// every piece: vm <- vm + f, vp <- vp - f.  Orbits are unchanged.
DlsSystem gauge_transform(const DlsSystem& sys,
                          std::function<double(const Vec&)> f,
                          std::function<Vec(const Vec&)> grad_f,
                          std::function<Mat(const Vec&)> hess_f);

// Max relative mismatch between the supplied derivative callbacks of a piece
// and central finite differences, sampled on a deterministic grid.
double max_derivative_mismatch(const LagrangianPiece& piece, int samples = 25,
                               double h = 1e-5);

}  // namespace ail::dls
