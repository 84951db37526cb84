#include "ail/dls.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

namespace ail::dls {

namespace {

double op_norm(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double inv_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / smin;
}

Vec random_in_box(const Box& box, std::mt19937_64& rng) {
  Vec x(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    std::uniform_real_distribution<double> dist(box.lo(i), box.hi(i));
    x(i) = dist(rng);
  }
  return x;
}

Vec random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = dist(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

// Evenly spaced per-axis grid points, odd so the center is included.
std::vector<Vec> grid_points(const Box& box, int per_axis) {
  const int m = box.dim();
  std::vector<Vec> pts;
  std::vector<int> idx(m, 0);
  while (true) {
    Vec x(m);
    for (int i = 0; i < m; ++i) {
      const double t = per_axis == 1
                           ? 0.5
                           : static_cast<double>(idx[i]) / (per_axis - 1);
      x(i) = box.lo(i) + t * (box.hi(i) - box.lo(i));
    }
    pts.push_back(std::move(x));
    int i = 0;
    for (; i < m; ++i) {
      if (++idx[i] < per_axis) break;
      idx[i] = 0;
    }
    if (i == m) break;
  }
  return pts;
}

}  // namespace

Box Box::cube(int dim, double lo, double hi) {
  Box b;
  b.lo = Vec::Constant(dim, lo);
  b.hi = Vec::Constant(dim, hi);
  return b;
}

bool Box::contains(const Vec& x, double slack) const {
  for (int i = 0; i < dim(); ++i) {
    if (x(i) < lo(i) - slack || x(i) > hi(i) + slack) return false;
  }
  return true;
}

Vec Box::clamp(const Vec& x) const {
  Vec y = x;
  for (int i = 0; i < dim(); ++i) y(i) = std::clamp(y(i), lo(i), hi(i));
  return y;
}

double LagrangianPiece::L(const Vec& x, const Vec& y) const {
  return vm(x) + vp(y) + u(x, y);
}

Vec LagrangianPiece::grad_x(const Vec& x, const Vec& y) const {
  return grad_vm(x) + grad_u_x(x, y);
}

Vec LagrangianPiece::grad_y(const Vec& x, const Vec& y) const {
  return grad_vp(y) + grad_u_y(x, y);
}

DlsSystem::DlsSystem(int dim, symbolic::TransitionGraph graph,
                     std::vector<LagrangianPiece> pieces)
    : dim_(dim), graph_(std::move(graph)), pieces_(std::move(pieces)) {
  if (pieces_.size() != graph_.vertices().size())
    throw Error("piece count does not match vertex count");
  for (const auto& p : pieces_) {
    if (p.dim != dim_) throw Error("piece dimension mismatch");
  }
}

const LagrangianPiece& DlsSystem::piece(int vertex) const {
  return pieces_[graph_.vertex_pos(vertex)];
}

double DlsSystem::psi(int edge_id, const Vec& x) const {
  const auto& e = graph_.edge(edge_id);
  return piece(e.src).vp(x) + piece(e.dst).vm(x);
}

Vec DlsSystem::grad_psi(int edge_id, const Vec& x) const {
  const auto& e = graph_.edge(edge_id);
  return piece(e.src).grad_vp(x) + piece(e.dst).grad_vm(x);
}

Mat DlsSystem::hess_psi(int edge_id, const Vec& x) const {
  const auto& e = graph_.edge(edge_id);
  return piece(e.src).hess_vp(x) + piece(e.dst).hess_vm(x);
}

Box DlsSystem::psi_domain(int edge_id) const {
  const auto& e = graph_.edge(edge_id);
  const Box& a = piece(e.src).dom_y;
  const Box& b = piece(e.dst).dom_x;
  Box out;
  out.lo = a.lo.cwiseMax(b.lo);
  out.hi = a.hi.cwiseMin(b.hi);
  for (int i = 0; i < out.dim(); ++i) {
    if (out.lo(i) > out.hi(i)) throw Error("empty transition domain");
  }
  return out;
}

void DlsSystem::set_edge_data(int edge_id, EdgeData data) {
  graph_.edge(edge_id);
  edge_data_[edge_id] = std::move(data);
}

const EdgeData& DlsSystem::edge_data(int edge_id) const {
  auto it = edge_data_.find(edge_id);
  if (it == edge_data_.end()) throw Error("edge data missing");
  return it->second;
}

bool DlsSystem::has_edge_data(int edge_id) const {
  return edge_data_.count(edge_id) != 0;
}

void DlsSystem::set_vertex_label(int vertex, std::string label) {
  graph_.vertex_pos(vertex);
  labels_[vertex] = std::move(label);
}

std::string DlsSystem::vertex_label(int vertex) const {
  auto it = labels_.find(vertex);
  if (it != labels_.end()) return it->second;
  return std::to_string(vertex);
}

EdgeData find_critical_point(const DlsSystem& sys, int edge_id,
                             const Vec& seed, double r_cap) {
  const Box dom = sys.psi_domain(edge_id);
  Vec x = seed;
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    const Vec g = sys.grad_psi(edge_id, x);
    if (g.norm() <= 1e-12) {
      converged = true;
      break;
    }
    const Mat h = sys.hess_psi(edge_id, x);
    Eigen::FullPivLU<Mat> lu(h);
    if (!lu.isInvertible())
      throw CertificationError("degenerate critical point");
    Vec step = lu.solve(g);
    // Damped step: back off while the gradient norm grows.
    double scale = 1.0;
    Vec next = x - step;
    for (int k = 0; k < 30; ++k) {
      if (sys.grad_psi(edge_id, next).norm() <= g.norm()) break;
      scale *= 0.5;
      next = x - scale * step;
    }
    x = next;
  }
  if (!converged && sys.grad_psi(edge_id, x).norm() > 1e-12)
    throw CertificationError("no critical point from seed");
  if (!dom.contains(x, 1e-9))
    throw CertificationError("critical point outside domain");

  const Mat h0 = sys.hess_psi(edge_id, x);
  Eigen::JacobiSVD<Mat> svd(h0);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0 || std::max(smax, 1.0) / smin > 1e12)
    throw CertificationError("degenerate critical point");

  const double lip = 2.0 / smin;
  // Largest candidate radius: stay inside the domain and below the cap.
  double r_dom = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dom.dim(); ++i)
    r_dom = std::min(r_dom, std::min(x(i) - dom.lo(i), dom.hi(i) - x(i)));
  const double r_max = std::min(r_cap, r_dom);
  if (!(r_max > 0.0)) throw CertificationError("no uniformity ball");

  // Accept the largest tested radius on which the Hessian stays within half
  // of 1/lip of its value at the critical point.
  const double allowed = smin / 2.0;
  std::mt19937_64 rng(0x9e3779b9u ^ static_cast<std::uint64_t>(edge_id));
  std::vector<Vec> dirs;
  const int m = dom.dim();
  for (int i = 0; i < m; ++i) {
    Vec e = Vec::Zero(m);
    e(i) = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  for (int k = 0; k < 32; ++k) dirs.push_back(random_unit(m, rng));

  double radius = 0.0;
  for (int k = 16; k >= 1; --k) {
    const double r = r_max * k / 16.0;
    bool ok = true;
    for (const Vec& d : dirs) {
      for (double scale : {1.0, 0.5}) {
        const Vec p = x + scale * r * d;
        if (!dom.contains(p, 1e-12)) continue;
        if (op_norm(sys.hess_psi(edge_id, p) - h0) > allowed) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) {
      radius = r;
      break;
    }
  }
  if (radius == 0.0) throw CertificationError("no uniformity ball");

  EdgeData data;
  data.edge_id = edge_id;
  data.critical_point = x;
  data.hessian = h0;
  data.radius = radius;
  data.lip_phi = lip;
  return data;
}

EdgeData find_critical_point(const DlsSystem& sys, int edge_id) {
  const Box dom = sys.psi_domain(edge_id);
  double width = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dom.dim(); ++i)
    width = std::min(width, dom.hi(i) - dom.lo(i));
  return find_critical_point(sys, edge_id, dom.center(), width / 2.0);
}

void find_all_critical_points(DlsSystem& sys) {
  for (const auto& e : sys.graph().edges())
    sys.set_edge_data(e.id, find_critical_point(sys, e.id));
}

Vec phi_eval(const DlsSystem& sys, int edge_id, const Vec& w, double tol) {
  const EdgeData& data = sys.edge_data(edge_id);
  const Vec& a = data.critical_point;
  Vec x = a;
  for (int it = 0; it < 200; ++it) {
    const Vec g = sys.grad_psi(edge_id, x) - w;
    if (g.norm() <= tol) {
      if ((x - a).norm() > data.radius * (1.0 + 1e-9))
        throw CertificationError("phi outside uniformity ball");
      return x;
    }
    const Mat h = sys.hess_psi(edge_id, x);
    Eigen::FullPivLU<Mat> lu(h);
    if (!lu.isInvertible())
      throw CertificationError("phi outside uniformity ball");
    x -= lu.solve(g);
    if ((x - a).norm() > 2.0 * data.radius)
      throw CertificationError("phi outside uniformity ball");
  }
  throw Error("phi iteration failed");
}

UniformityReport uniformity_report(const DlsSystem& sys,
                                   const ShadowConfig& cfg, int samples) {
  if (sys.graph().edges().empty()) throw Error("system has no edges");
  UniformityReport rep;
  rep.r_min = std::numeric_limits<double>::infinity();
  for (const auto& e : sys.graph().edges()) {
    const EdgeData& d = sys.edge_data(e.id);
    rep.r_min = std::min(rep.r_min, d.radius);
    rep.lip_max = std::max(rep.lip_max, d.lip_phi);
  }
  std::mt19937_64 rng(0x51e55u);
  for (int v : sys.graph().vertices()) {
    const LagrangianPiece& p = sys.piece(v);
    std::vector<std::pair<Vec, Vec>> pairs;
    const auto gx = grid_points(p.dom_x, 5);
    const auto gy = grid_points(p.dom_y, 5);
    for (const auto& x : gx)
      for (const auto& y : gy) pairs.emplace_back(x, y);
    for (int k = 0; k < samples; ++k)
      pairs.emplace_back(random_in_box(p.dom_x, rng),
                         random_in_box(p.dom_y, rng));
    for (const auto& [x, y] : pairs) {
      rep.eps = std::max({rep.eps, op_norm(p.hess_u_xx(x, y)),
                          op_norm(p.hess_u_xy(x, y)),
                          op_norm(p.hess_u_yy(x, y))});
      rep.du_sup = std::max({rep.du_sup, p.grad_u_x(x, y).norm(),
                             p.grad_u_y(x, y).norm()});
    }
  }
  rep.contraction_bound = 2.0 * rep.lip_max * rep.eps;
  const double sigma = std::isnan(cfg.sigma) ? rep.r_min / 2.0 : cfg.sigma;
  rep.satisfied =
      rep.contraction_bound < sigma && rep.contraction_bound < 0.5;
  return rep;
}

namespace {

// Coupling gradient sum at interior point i of the current configuration.
Vec neighbor_term(const DlsSystem& sys, const std::vector<int>& eids,
                  const std::vector<Vec>& pts, std::size_t i, bool periodic) {
  const std::size_t n = pts.size();
  const auto& e = sys.graph().edge(eids[i]);
  const std::size_t prev = (i + n - 1) % n;
  const std::size_t next = (i + 1) % n;
  Vec w = sys.piece(e.src).grad_u_y(pts[prev], pts[i]);
  w += sys.piece(e.dst).grad_u_x(pts[i], pts[next]);
  (void)periodic;
  return w;
}

Orbit run_shadow(const DlsSystem& sys, const symbolic::Code& code,
                 std::vector<Vec> pts, const ShadowConfig& cfg) {
  if (!symbolic::is_admissible(code, sys.graph()))
    throw Error("code not admissible");
  const std::size_t n = code.edges.size();
  if (n == 0) throw Error("empty code");
  if (pts.size() != n) throw Error("initial configuration size mismatch");
  const bool periodic = code.kind == symbolic::Code::Kind::periodic;
  if (!periodic && n < 3) throw Error("window code too short");

  double sigma = cfg.sigma;
  if (std::isnan(sigma)) {
    sigma = std::numeric_limits<double>::infinity();
    for (int id : code.edges)
      sigma = std::min(sigma, sys.edge_data(id).radius / 2.0);
  }

  const std::size_t lo = periodic ? 0 : 1;
  const std::size_t hi = periodic ? n : n - 1;

  Orbit orbit;
  orbit.code = code;

  // A priori displacement bound from the trivial configuration, valid when
  // the coupling keeps the sweep a 1/2-contraction.
  {
    std::vector<Vec> crit(n);
    for (std::size_t i = 0; i < n; ++i)
      crit[i] = sys.edge_data(code.edges[i]).critical_point;
    double first = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec w = neighbor_term(sys, code.edges, crit, i, periodic);
      first = std::max(first,
                       sys.edge_data(code.edges[i]).lip_phi * w.norm());
    }
    orbit.rho_bound = 2.0 * first;
  }

  double delta_prev = std::numeric_limits<double>::quiet_NaN();
  int bad_streak = 0;
  int sweeps = 0;
  bool converged = false;
  while (sweeps < cfg.max_iterations) {
    ++sweeps;
    std::vector<Vec> next = pts;
    double delta = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec w = neighbor_term(sys, code.edges, pts, i, periodic);
      next[i] = phi_eval(sys, code.edges[i], -w, cfg.inner_tol);
      delta = std::max(delta, (next[i] - pts[i]).norm());
    }
    pts = std::move(next);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto& d = sys.edge_data(code.edges[i]);
      if ((pts[i] - d.critical_point).norm() > sigma * (1.0 + 1e-12))
        throw CertificationError("left uniqueness ball");
    }
    if (!std::isnan(delta_prev) && delta_prev > 10.0 * cfg.tol) {
      const double ratio = delta / delta_prev;
      orbit.contraction_estimate = std::max(orbit.contraction_estimate, ratio);
      bad_streak = ratio >= 1.0 ? bad_streak + 1 : 0;
      if (bad_streak >= 10)
        throw CertificationError("contraction failure: eps too large");
    }
    delta_prev = delta;
    if (delta <= cfg.tol) {
      converged = true;
      break;
    }
  }

  orbit.points = std::move(pts);
  orbit.iterations = sweeps;
  orbit.converged = converged;
  orbit.rho = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = sys.edge_data(code.edges[i]);
    orbit.rho =
        std::max(orbit.rho, (orbit.points[i] - d.critical_point).norm());
  }
  orbit.residual = residual(sys, orbit);
  return orbit;
}

}  // namespace

Orbit shadow(const DlsSystem& sys, const symbolic::Code& code,
             const ShadowConfig& cfg) {
  std::vector<Vec> pts;
  pts.reserve(code.edges.size());
  for (int id : code.edges)
    pts.push_back(sys.edge_data(id).critical_point);
  return run_shadow(sys, code, std::move(pts), cfg);
}

Orbit shadow_from(const DlsSystem& sys, const symbolic::Code& code,
                  std::vector<Vec> initial, const ShadowConfig& cfg) {
  return run_shadow(sys, code, std::move(initial), cfg);
}

std::vector<double> local_residuals(const DlsSystem& sys, const Orbit& orbit) {
  const auto& code = orbit.code;
  const std::size_t n = code.edges.size();
  const bool periodic = code.kind == symbolic::Code::Kind::periodic;
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  const std::size_t lo = periodic ? 0 : 1;
  const std::size_t hi = periodic ? n : n - 1;
  for (std::size_t i = lo; i < hi; ++i) {
    const Vec w =
        neighbor_term(sys, code.edges, orbit.points, i, periodic);
    out[i] = (sys.grad_psi(code.edges[i], orbit.points[i]) + w).norm();
  }
  return out;
}

double residual(const DlsSystem& sys, const Orbit& orbit) {
  double r = 0.0;
  for (double v : local_residuals(sys, orbit)) {
    if (!std::isnan(v)) r = std::max(r, v);
  }
  return r;
}

double action_window(const DlsSystem& sys, const Orbit& orbit) {
  const auto& code = orbit.code;
  const std::size_t n = code.edges.size();
  const bool periodic = code.kind == symbolic::Code::Kind::periodic;
  const std::size_t pairs = periodic ? n : n - 1;
  double total = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto& e = sys.graph().edge(code.edges[i]);
    total += sys.piece(e.dst).L(orbit.points[i],
                                orbit.points[(i + 1) % n]);
  }
  return total;
}

TwistInfo twist_matrix(const LagrangianPiece& piece, const Vec& x,
                       const Vec& y) {
  TwistInfo info;
  info.B = piece.hess_u_xy(x, y);
  Eigen::JacobiSVD<Mat> svd(info.B);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  info.nondegenerate = smin > 1e-12 * std::max(smax, 1.0);
  return info;
}

Orbit newton_shadow(const DlsSystem& sys, const symbolic::Code& code,
                    std::vector<Vec> initial, int max_iter, double tol) {
  if (!symbolic::is_admissible(code, sys.graph()))
    throw Error("code not admissible");
  const std::size_t n = code.edges.size();
  if (initial.size() != n) throw Error("initial configuration size mismatch");
  const bool periodic = code.kind == symbolic::Code::Kind::periodic;
  if (!periodic && n < 3) throw Error("window code too short");
  const int m = sys.dim();

  const std::size_t lo = periodic ? 0 : 1;
  const std::size_t hi = periodic ? n : n - 1;
  const std::size_t unknowns = hi - lo;

  auto col_of = [&](std::size_t i) -> long {
    // Unknown block column for point index i; -1 when pinned.
    if (periodic) return static_cast<long>(i % n);
    if (i < lo || i >= hi) return -1;
    return static_cast<long>(i - lo);
  };

  std::vector<Vec> pts = std::move(initial);
  bool converged = false;
  int iters = 0;
  for (; iters < max_iter; ++iters) {
    Vec f(unknowns * m);
    Mat jac = Mat::Zero(unknowns * m, unknowns * m);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto& e = sys.graph().edge(code.edges[i]);
      const std::size_t prev = (i + n - 1) % n;
      const std::size_t next = (i + 1) % n;
      const Vec w = sys.piece(e.src).grad_u_y(pts[prev], pts[i]) +
                    sys.piece(e.dst).grad_u_x(pts[i], pts[next]);
      const long row = col_of(i);
      f.segment(row * m, m) = sys.grad_psi(code.edges[i], pts[i]) + w;

      Mat center = sys.hess_psi(code.edges[i], pts[i]) +
                   sys.piece(e.src).hess_u_yy(pts[prev], pts[i]) +
                   sys.piece(e.dst).hess_u_xx(pts[i], pts[next]);
      jac.block(row * m, row * m, m, m) += center;
      const long cprev = col_of(periodic ? prev : i - 1);
      if (cprev >= 0)
        jac.block(row * m, cprev * m, m, m) +=
            sys.piece(e.src).hess_u_xy(pts[prev], pts[i]).transpose();
      const long cnext = col_of(periodic ? next : i + 1);
      if (cnext >= 0)
        jac.block(row * m, cnext * m, m, m) +=
            sys.piece(e.dst).hess_u_xy(pts[i], pts[next]);
    }
    if (f.lpNorm<Eigen::Infinity>() <= tol) {
      converged = true;
      break;
    }
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) throw Error("singular stacked system");
    const Vec step = lu.solve(f);
    for (std::size_t i = lo; i < hi; ++i) {
      const long c = col_of(i);
      pts[i] -= step.segment(c * m, m);
    }
  }

  Orbit orbit;
  orbit.code = code;
  orbit.points = std::move(pts);
  orbit.iterations = iters;
  orbit.converged = converged;
  orbit.rho = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!sys.has_edge_data(code.edges[i])) continue;
    orbit.rho = std::max(
        orbit.rho,
        (orbit.points[i] - sys.edge_data(code.edges[i]).critical_point)
            .norm());
  }
  orbit.residual = residual(sys, orbit);
  return orbit;
}

DlsSystem gauge_transform(const DlsSystem& sys,
                          std::function<double(const Vec&)> f,
                          std::function<Vec(const Vec&)> grad_f,
                          std::function<Mat(const Vec&)> hess_f) {
  std::vector<LagrangianPiece> pieces;
  for (int v : sys.graph().vertices()) {
    LagrangianPiece p = sys.piece(v);
    auto vm = p.vm;
    auto vp = p.vp;
    auto gvm = p.grad_vm;
    auto gvp = p.grad_vp;
    auto hvm = p.hess_vm;
    auto hvp = p.hess_vp;
    p.vm = [vm, f](const Vec& x) { return vm(x) + f(x); };
    p.vp = [vp, f](const Vec& y) { return vp(y) - f(y); };
    p.grad_vm = [gvm, grad_f](const Vec& x) { return Vec(gvm(x) + grad_f(x)); };
    p.grad_vp = [gvp, grad_f](const Vec& y) { return Vec(gvp(y) - grad_f(y)); };
    p.hess_vm = [hvm, hess_f](const Vec& x) { return Mat(hvm(x) + hess_f(x)); };
    p.hess_vp = [hvp, hess_f](const Vec& y) { return Mat(hvp(y) - hess_f(y)); };
    pieces.push_back(std::move(p));
  }
  DlsSystem out(sys.dim(), sys.graph(), std::move(pieces));
  for (const auto& e : sys.graph().edges()) {
    if (sys.has_edge_data(e.id)) out.set_edge_data(e.id, sys.edge_data(e.id));
  }
  return out;
}

double max_derivative_mismatch(const LagrangianPiece& piece, int samples,
                               double h) {
  std::mt19937_64 rng(0xd1ffu);
  const int m = piece.dim;
  double worst = 0.0;
  auto rel = [](double got, double want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
  };
  for (int s = 0; s < samples; ++s) {
    // Keep FD stencils inside the domain.
    Box inner_x = piece.dom_x;
    Box inner_y = piece.dom_y;
    inner_x.lo.array() += 2 * h;
    inner_x.hi.array() -= 2 * h;
    inner_y.lo.array() += 2 * h;
    inner_y.hi.array() -= 2 * h;
    const Vec x = random_in_box(inner_x, rng);
    const Vec y = random_in_box(inner_y, rng);
    for (int i = 0; i < m; ++i) {
      Vec dx = Vec::Zero(m);
      dx(i) = h;
      worst = std::max(
          worst, rel(piece.grad_vm(x)(i),
                     (piece.vm(x + dx) - piece.vm(x - dx)) / (2 * h)));
      worst = std::max(
          worst, rel(piece.grad_vp(y)(i),
                     (piece.vp(y + dx) - piece.vp(y - dx)) / (2 * h)));
      worst = std::max(
          worst, rel(piece.grad_u_x(x, y)(i),
                     (piece.u(x + dx, y) - piece.u(x - dx, y)) / (2 * h)));
      worst = std::max(
          worst, rel(piece.grad_u_y(x, y)(i),
                     (piece.u(x, y + dx) - piece.u(x, y - dx)) / (2 * h)));
      for (int j = 0; j < m; ++j) {
        Vec dj = Vec::Zero(m);
        dj(j) = h;
        worst = std::max(
            worst,
            rel(piece.hess_vm(x)(i, j),
                (piece.grad_vm(x + dj)(i) - piece.grad_vm(x - dj)(i)) /
                    (2 * h)));
        worst = std::max(
            worst,
            rel(piece.hess_vp(y)(i, j),
                (piece.grad_vp(y + dj)(i) - piece.grad_vp(y - dj)(i)) /
                    (2 * h)));
        worst = std::max(
            worst,
            rel(piece.hess_u_xx(x, y)(i, j),
                (piece.grad_u_x(x + dj, y)(i) -
                 piece.grad_u_x(x - dj, y)(i)) /
                    (2 * h)));
        worst = std::max(
            worst,
            rel(piece.hess_u_xy(x, y)(i, j),
                (piece.grad_u_x(x, y + dj)(i) -
                 piece.grad_u_x(x, y - dj)(i)) /
                    (2 * h)));
        worst = std::max(
            worst,
            rel(piece.hess_u_yy(x, y)(i, j),
                (piece.grad_u_y(x, y + dj)(i) -
                 piece.grad_u_y(x, y - dj)(i)) /
                    (2 * h)));
      }
    }
  }
  return worst;
}

}  // namespace ail::dls
