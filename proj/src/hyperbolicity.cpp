#include "ail/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ail::hyperbolicity {

namespace {

double op_norm(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double min_singular(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace

VariationalBlocks variational_blocks(const dls::DlsSystem& sys,
                                     const dls::Orbit& orbit) {
  if (orbit.residual > 1e-9) throw Error("orbit not converged");
  const auto& code = orbit.code;
  const std::size_t n = code.edges.size();
  const bool periodic = code.kind == symbolic::Code::Kind::periodic;
  VariationalBlocks blocks;
  blocks.dim = sys.dim();
  blocks.periodic = periodic;
  const std::size_t lo = periodic ? 0 : 1;
  const std::size_t hi = periodic ? n : n - 1;
  for (std::size_t i = lo; i < hi; ++i) {
    const auto& e = sys.graph().edge(code.edges[i]);
    const Vec& prev = orbit.points[(i + n - 1) % n];
    const Vec& cur = orbit.points[i];
    const Vec& next = orbit.points[(i + 1) % n];
    const Mat uxy_l = sys.piece(e.src).hess_u_xy(prev, cur);
    const Mat uyy_l = sys.piece(e.src).hess_u_yy(prev, cur);
    const Mat uxx_r = sys.piece(e.dst).hess_u_xx(cur, next);
    const Mat uxy_r = sys.piece(e.dst).hess_u_xy(cur, next);
    const Mat s = sys.hess_psi(code.edges[i], cur);

    blocks.index.push_back(static_cast<long>(i));
    blocks.g_minus.push_back(uxy_l.transpose());
    blocks.g_center.push_back(s + uyy_l + uxx_r);
    blocks.g_plus.push_back(uxy_r);

    Eigen::FullPivLU<Mat> lu(s);
    if (!lu.isInvertible())
      throw CertificationError("degenerate critical point");
    blocks.p.push_back(-lu.solve(Mat(uxy_l.transpose())));
    blocks.q.push_back(-lu.solve(Mat(uyy_l + uxx_r)));
    blocks.r.push_back(-lu.solve(uxy_r));
  }
  return blocks;
}

VariationalBlocks variational_blocks(const smap::Orbit& orbit,
                                     double coupling) {
  if (orbit.residual > 1e-9) throw Error("orbit not converged");
  if (coupling == 0.0) throw Error("coupling must be nonzero");
  const std::size_t n = orbit.points.size();
  const bool periodic = orbit.code.periodic;
  VariationalBlocks blocks;
  blocks.dim = 1;
  blocks.periodic = periodic;
  const std::size_t lo = periodic ? 0 : 1;
  const std::size_t hi = periodic ? n : n - 1;
  for (std::size_t i = lo; i < hi; ++i) {
    const double c = std::cos(orbit.points[i]);
    Mat gm(1, 1), gc(1, 1), gp(1, 1);
    gm(0, 0) = -1.0 / coupling;
    gc(0, 0) = 2.0 / coupling + c;
    gp(0, 0) = -1.0 / coupling;
    blocks.index.push_back(static_cast<long>(i));
    blocks.g_minus.push_back(gm);
    blocks.g_center.push_back(gc);
    blocks.g_plus.push_back(gp);
    Mat p(1, 1), q(1, 1), r(1, 1);
    p(0, 0) = 1.0 / (coupling * c);
    q(0, 0) = -2.0 / (coupling * c);
    r(0, 0) = 1.0 / (coupling * c);
    blocks.p.push_back(p);
    blocks.q.push_back(q);
    blocks.r.push_back(r);
  }
  return blocks;
}

namespace {

ConeReport scalar_cone_verify(const VariationalBlocks& blocks,
                              const ConeParams& cones) {
  ConeReport rep;
  rep.tier = "scalar-exact";
  rep.mu_measured = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (std::size_t j = 0; j < blocks.g_center.size(); ++j) {
    const double gm = std::abs(blocks.g_minus[j](0, 0));
    const double gc = std::abs(blocks.g_center[j](0, 0));
    const double gp = std::abs(blocks.g_plus[j](0, 0));
    if (gp < 1e-300 || gm < 1e-300)
      throw CertificationError("twist failure at index " +
                               std::to_string(blocks.index[j]));
    const double rh = (gc - cones.alpha_h * gm) / gp;
    const double rv = (gc - cones.alpha_v * gp) / gm;
    const bool incl =
        cones.alpha_h * rh > 1.0 && cones.alpha_v * rv > 1.0;
    const double mu_h =
        std::sqrt((1.0 + rh * rh) / (1.0 + cones.alpha_h * cones.alpha_h));
    const double mu_v =
        std::sqrt((1.0 + rv * rv) / (1.0 + cones.alpha_v * cones.alpha_v));
    const double mu = std::min(mu_h, mu_v);
    if (mu < rep.mu_measured) {
      rep.mu_measured = mu;
      rep.worst_index = blocks.index[j];
    }
    if (!incl) {
      ok = false;
      rep.worst_index = blocks.index[j];
    }
  }
  rep.pass = ok && rep.mu_measured >= cones.mu;
  rep.log_mu = rep.mu_measured > 0.0 ? std::log(rep.mu_measured) : 0.0;
  return rep;
}

ConeReport sampled_cone_verify(const VariationalBlocks& blocks,
                               const ConeParams& cones) {
  ConeReport rep;
  rep.tier = "sampled";
  rep.mu_measured = std::numeric_limits<double>::infinity();
  const int m = blocks.dim;
  std::mt19937_64 rng(0xc0de5u);
  std::normal_distribution<double> dist(0.0, 1.0);
  auto unit = [&] {
    Vec v(m);
    do {
      for (int i = 0; i < m; ++i) v(i) = dist(rng);
    } while (v.norm() < 1e-12);
    return Vec(v / v.norm());
  };
  bool ok = true;
  for (std::size_t j = 0; j < blocks.g_center.size() && ok; ++j) {
    Eigen::FullPivLU<Mat> lu_p(blocks.g_plus[j]);
    Eigen::FullPivLU<Mat> lu_m(blocks.g_minus[j]);
    if (!lu_p.isInvertible() || !lu_m.isInvertible())
      throw CertificationError("twist failure at index " +
                               std::to_string(blocks.index[j]));
    for (int s = 0; s < 1000; ++s) {
      // H-cone boundary vector: |u_prev| = alpha_h |u_cur|.
      const Vec u_cur = unit();
      const Vec u_prev = cones.alpha_h * unit();
      const Vec u_next = -lu_p.solve(blocks.g_minus[j] * u_prev +
                                     blocks.g_center[j] * u_cur);
      const double in_norm = std::sqrt(u_prev.squaredNorm() + 1.0);
      const double out_norm =
          std::sqrt(1.0 + u_next.squaredNorm());
      const double mu = out_norm / in_norm;
      if (!(u_cur.norm() <= cones.alpha_h * u_next.norm())) ok = false;
      if (mu < rep.mu_measured) {
        rep.mu_measured = mu;
        rep.worst_index = blocks.index[j];
      }
      // V-cone boundary vector, propagated backwards.
      const Vec v_cur = unit();
      const Vec v_next = cones.alpha_v * unit();
      const Vec v_prev = -lu_m.solve(blocks.g_center[j] * v_cur +
                                     blocks.g_plus[j] * v_next);
      const double vin = std::sqrt(1.0 + v_next.squaredNorm());
      const double vout = std::sqrt(v_prev.squaredNorm() + 1.0);
      const double mu_v = vout / vin;
      if (!(v_cur.norm() <= cones.alpha_v * v_prev.norm())) ok = false;
      if (mu_v < rep.mu_measured) {
        rep.mu_measured = mu_v;
        rep.worst_index = blocks.index[j];
      }
      if (!ok) break;
    }
  }
  rep.pass = ok && rep.mu_measured >= cones.mu;
  rep.log_mu = rep.mu_measured > 0.0 ? std::log(rep.mu_measured) : 0.0;
  return rep;
}

}  // namespace

ConeReport cone_verify(const VariationalBlocks& blocks,
                       const ConeParams& cones) {
  if (blocks.g_center.empty()) throw Error("no variational blocks");

  double pqr_max = 0.0;
  for (std::size_t j = 0; j < blocks.p.size(); ++j) {
    pqr_max = std::max({pqr_max, op_norm(blocks.p[j]), op_norm(blocks.q[j]),
                        op_norm(blocks.r[j])});
  }
  if (pqr_max == 0.0) {
    ConeReport rep;
    rep.pass = true;
    rep.tier = "ai-limit-degenerate";
    rep.mu_measured = std::numeric_limits<double>::infinity();
    rep.log_mu = std::numeric_limits<double>::infinity();
    return rep;
  }

  if (blocks.dim == 1) return scalar_cone_verify(blocks, cones);

  // Certified sufficient condition: small fixed-point blocks give cone
  // inclusion and doubling of pair norms.
  const double b = pqr_max;
  if (3.0 * b < 2.0 && b / (1.0 - 1.5 * b) < 0.5 && cones.mu <= 2.0) {
    ConeReport rep;
    rep.pass = true;
    rep.tier = "norm-bound";
    rep.mu_measured = 2.0;
    rep.log_mu = std::log(2.0);
    double worst = 0.0;
    for (std::size_t j = 0; j < blocks.p.size(); ++j) {
      const double local = std::max(
          {op_norm(blocks.p[j]), op_norm(blocks.q[j]), op_norm(blocks.r[j])});
      if (local >= worst) {
        worst = local;
        rep.worst_index = blocks.index[j];
      }
    }
    return rep;
  }
  return sampled_cone_verify(blocks, cones);
}

std::vector<Vec> stable_vector(const VariationalBlocks& blocks, const Vec& u0,
                               int horizon) {
  if (horizon < 1) throw Error("horizon must be positive");
  if (blocks.g_center.empty()) throw Error("no variational blocks");
  const std::size_t nb = blocks.g_center.size();
  auto block_at = [&](int j) -> std::size_t {
    if (blocks.periodic) return static_cast<std::size_t>(j) % nb;
    if (static_cast<std::size_t>(j) >= nb)
      throw Error("horizon exceeds window blocks");
    return static_cast<std::size_t>(j);
  };

  std::vector<Vec> u(static_cast<std::size_t>(horizon) + 1,
                     Vec::Zero(u0.size()));
  u[0] = u0;
  const double scale = std::max(1.0, u0.norm());
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double delta = 0.0;
    for (int j = 1; j < horizon; ++j) {
      const std::size_t b = block_at(j);
      Eigen::FullPivLU<Mat> lu(blocks.g_center[b]);
      if (!lu.isInvertible())
        throw CertificationError("no stable direction certified");
      const Vec rhs = blocks.g_minus[b] * u[j - 1] +
                      blocks.g_plus[b] * u[j + 1];
      const Vec next = -lu.solve(rhs);
      delta = std::max(delta, (next - u[static_cast<std::size_t>(j)]).norm());
      u[static_cast<std::size_t>(j)] = next;
    }
    if (delta <= 1e-14 * scale) return u;
    if (delta > 1e6 * scale)
      throw CertificationError("no stable direction certified");
  }
  throw CertificationError("no stable direction certified");
}

}  // namespace ail::hyperbolicity
