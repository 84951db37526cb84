#include "ail/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <utility>

namespace ail::models {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double newton_scalar(const std::function<double(double)>& g,
                     const std::function<double(double)>& dg, double seed) {
  double x = seed;
  for (int it = 0; it < 100; ++it) {
    const double v = g(x);
    if (std::abs(v) <= 1e-13) return x;
    const double d = dg(x);
    if (std::abs(d) < 1e-14)
      throw CertificationError("degenerate critical point");
    double step = v / d;
    double scale = 1.0;
    while (scale > 1e-6 && std::abs(g(x - scale * step)) > std::abs(v))
      scale *= 0.5;
    x -= scale * step;
  }
  throw CertificationError("no critical point from seed");
}

std::vector<double> dedupe_sorted(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  }
  return out;
}

double min_gap(const std::vector<double>& sorted, double fallback) {
  if (sorted.size() < 2) return fallback;
  double g = fallback;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    g = std::min(g, sorted[i] - sorted[i - 1]);
  return g;
}

Vec scalar_vec(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

Mat scalar_mat(double x) {
  Mat m(1, 1);
  m(0, 0) = x;
  return m;
}

}  // namespace

Potential builtin_potential(const std::string& name) {
  Potential p;
  if (name == "cos") {
    p.f = [](double x) { return std::cos(kTwoPi * x); };
    p.df = [](double x) { return -kTwoPi * std::sin(kTwoPi * x); };
    p.d2f = [](double x) { return -kTwoPi * kTwoPi * std::cos(kTwoPi * x); };
    return p;
  }
  if (name == "neg_cos") {
    p.f = [](double x) { return -std::cos(kTwoPi * x); };
    p.df = [](double x) { return kTwoPi * std::sin(kTwoPi * x); };
    p.d2f = [](double x) { return kTwoPi * kTwoPi * std::cos(kTwoPi * x); };
    return p;
  }
  if (name == "two_well") {
    p.f = [](double x) {
      return std::cos(2.0 * kTwoPi * x) / 4.0 + 0.15 * std::cos(kTwoPi * x);
    };
    p.df = [](double x) {
      return -kPi * std::sin(2.0 * kTwoPi * x) -
             0.3 * kPi * std::sin(kTwoPi * x);
    };
    p.d2f = [](double x) {
      return -4.0 * kPi * kPi * std::cos(2.0 * kTwoPi * x) -
             0.6 * kPi * kPi * std::cos(kTwoPi * x);
    };
    return p;
  }
  throw Error("unknown potential: " + name);
}

PeriodicCubicSpline::PeriodicCubicSpline(std::vector<double> samples)
    : y_(std::move(samples)), n_(y_.size()) {
  if (n_ < 3) throw Error("spline needs at least 3 samples");
  const double h = 1.0 / static_cast<double>(n_);
  // Periodic tridiagonal system for the second derivatives.
  Mat a = Mat::Zero(n_, n_);
  Vec b(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t prev = (i + n_ - 1) % n_;
    const std::size_t next = (i + 1) % n_;
    a(i, prev) += 1.0;
    a(i, i) += 4.0;
    a(i, next) += 1.0;
    b(i) = 6.0 * (y_[prev] - 2.0 * y_[i] + y_[next]) / (h * h);
  }
  const Vec m = a.fullPivLu().solve(b);
  m_.assign(m.data(), m.data() + n_);
}

double PeriodicCubicSpline::value(double x) const {
  const double h = 1.0 / static_cast<double>(n_);
  double t = x - std::floor(x);
  const auto i = std::min(static_cast<std::size_t>(t / h), n_ - 1);
  const std::size_t j = (i + 1) % n_;
  const double s = t - static_cast<double>(i) * h;
  const double r = h - s;
  return (m_[i] * r * r * r + m_[j] * s * s * s) / (6.0 * h) +
         (y_[i] / h - m_[i] * h / 6.0) * r +
         (y_[j] / h - m_[j] * h / 6.0) * s;
}

double PeriodicCubicSpline::deriv(double x) const {
  const double h = 1.0 / static_cast<double>(n_);
  double t = x - std::floor(x);
  const auto i = std::min(static_cast<std::size_t>(t / h), n_ - 1);
  const std::size_t j = (i + 1) % n_;
  const double s = t - static_cast<double>(i) * h;
  const double r = h - s;
  return (-m_[i] * r * r + m_[j] * s * s) / (2.0 * h) -
         (y_[i] / h - m_[i] * h / 6.0) + (y_[j] / h - m_[j] * h / 6.0);
}

double PeriodicCubicSpline::deriv2(double x) const {
  const double h = 1.0 / static_cast<double>(n_);
  double t = x - std::floor(x);
  const auto i = std::min(static_cast<std::size_t>(t / h), n_ - 1);
  const std::size_t j = (i + 1) % n_;
  const double s = t - static_cast<double>(i) * h;
  const double r = h - s;
  return (m_[i] * r + m_[j] * s) / h;
}

// ---------------------------------------------------------------------------
// Kick map.

KickMapSpec KickMapSpec::scalar(double eps2, const Potential& v,
                                double lattice, std::vector<double> seeds) {
  KickMapSpec spec;
  spec.dim = 1;
  spec.eps2 = eps2;
  spec.V = [f = v.f](const Vec& x) { return f(x(0)); };
  spec.grad_V = [df = v.df](const Vec& x) { return scalar_vec(df(x(0))); };
  spec.hess_V = [d2f = v.d2f](const Vec& x) { return scalar_mat(d2f(x(0))); };
  spec.lattice = scalar_vec(lattice);
  if (seeds.empty()) seeds = {0.0, 0.5 * lattice};
  for (double s : seeds) spec.seeds.push_back(scalar_vec(s));
  return spec;
}

int KickSystem::vertex_for(int site_a, int site_b) const {
  for (std::size_t v = 0; v < vertex_sites.size(); ++v) {
    if (vertex_sites[v].first == site_a && vertex_sites[v].second == site_b)
      return static_cast<int>(v);
  }
  return -1;
}

int KickSystem::site_near(const Vec& x, double tol) const {
  for (std::size_t s = 0; s < sites.size(); ++s) {
    if ((sites[s] - x).norm() <= tol) return static_cast<int>(s);
  }
  return -1;
}

symbolic::Code KickSystem::code_for(const std::vector<int>& site_path,
                                    bool periodic) const {
  const std::size_t n = site_path.size();
  if (n == 0) throw Error("empty site path");
  std::map<std::pair<int, int>, int> edge_by_pair;
  for (const auto& e : system.graph().edges())
    edge_by_pair[{e.src, e.dst}] = e.id;

  auto vertex_of = [&](int a, int b) {
    const int v = vertex_for(a, b);
    if (v < 0) throw Error("site pair exceeds pair distance");
    return v;
  };
  auto edge_of = [&](int va, int vb) {
    auto it = edge_by_pair.find({va, vb});
    if (it == edge_by_pair.end()) throw Error("edge not in graph");
    return it->second;
  };

  std::vector<int> edges;
  edges.reserve(n);
  if (periodic) {
    for (std::size_t i = 0; i < n; ++i) {
      const int sp = site_path[(i + n - 1) % n];
      const int sc = site_path[i];
      const int sn = site_path[(i + 1) % n];
      edges.push_back(edge_of(vertex_of(sp, sc), vertex_of(sc, sn)));
    }
    return symbolic::Code::periodic(std::move(edges));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int sp = i == 0 ? site_path[0] : site_path[i - 1];
    const int sc = site_path[i];
    const int sn = i + 1 == n ? site_path[n - 1] : site_path[i + 1];
    edges.push_back(edge_of(vertex_of(sp, sc), vertex_of(sc, sn)));
  }
  return symbolic::Code::window(std::move(edges));
}

KickSystem make_kick_map(const KickMapSpec& spec) {
  const int m = spec.dim;
  if (m < 1) throw Error("dimension must be positive");
  if (!spec.V || !spec.grad_V || !spec.hess_V)
    throw Error("potential evaluators missing");

  Mat b = spec.B;
  if (b.size() == 0) b = spec.eps2 * Mat::Identity(m, m);
  if (b.rows() != m || b.cols() != m) throw Error("B dimension mismatch");
  if ((b - b.transpose()).norm() > 1e-12 * (1.0 + b.norm()))
    throw Error("B not symmetric");

  Vec lattice = spec.lattice;
  if (lattice.size() == 0) lattice = Vec::Ones(m);
  if (lattice.size() != m) throw Error("lattice dimension mismatch");
  for (int i = 0; i < m; ++i) {
    if (!(lattice(i) > 0.0)) throw Error("lattice periods must be positive");
  }

  // Refine the seeds to critical points of V in the fundamental cell.
  std::vector<Vec> crit;
  for (const Vec& seed : spec.seeds) {
    Vec x = seed;
    bool ok = true;
    for (int it = 0; it < 100; ++it) {
      const Vec g = spec.grad_V(x);
      if (g.norm() <= 1e-13) break;
      Eigen::FullPivLU<Mat> lu(spec.hess_V(x));
      if (!lu.isInvertible()) {
        ok = false;
        break;
      }
      x -= lu.solve(g);
    }
    if (!ok || spec.grad_V(x).norm() > 1e-12) continue;
    Eigen::JacobiSVD<Mat> svd(spec.hess_V(x));
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0 ||
        std::max(sv(0), 1.0) / sv(sv.size() - 1) > 1e12)
      continue;
    bool dup = false;
    for (const Vec& c : crit) {
      if ((c - x).norm() < 1e-8) dup = true;
    }
    if (!dup) crit.push_back(x);
  }
  if (crit.empty()) throw Error("model not anti-integrable");

  KickSystem out;

  // Lifted well set: critical points translated over the finite lattice box.
  std::vector<int> shift(m, -spec.shifts);
  while (true) {
    Vec t(m);
    for (int i = 0; i < m; ++i) t(i) = shift[i] * lattice(i);
    for (const Vec& c : crit) out.sites.push_back(c + t);
    int i = 0;
    for (; i < m; ++i) {
      if (++shift[i] <= spec.shifts) break;
      shift[i] = -spec.shifts;
    }
    if (i == m) break;
  }

  double gap = lattice.minCoeff();
  for (std::size_t i = 0; i < out.sites.size(); ++i) {
    for (std::size_t j = i + 1; j < out.sites.size(); ++j)
      gap = std::min(gap, (out.sites[i] - out.sites[j]).norm());
  }
  const double half_width = 0.375 * gap;

  double pd = spec.pair_distance;
  if (std::isnan(pd)) pd = spec.shifts * lattice.minCoeff();

  std::vector<int> vertex_ids;
  std::vector<dls::LagrangianPiece> pieces;
  for (std::size_t ia = 0; ia < out.sites.size(); ++ia) {
    for (std::size_t ib = 0; ib < out.sites.size(); ++ib) {
      if ((out.sites[ib] - out.sites[ia]).norm() > pd) continue;
      const int id = static_cast<int>(out.vertex_sites.size());
      out.vertex_sites.emplace_back(static_cast<int>(ia),
                                    static_cast<int>(ib));
      vertex_ids.push_back(id);

      dls::LagrangianPiece p;
      p.dim = m;
      p.dom_x.lo = (out.sites[ia].array() - half_width).matrix();
      p.dom_x.hi = (out.sites[ia].array() + half_width).matrix();
      p.dom_y.lo = (out.sites[ib].array() - half_width).matrix();
      p.dom_y.hi = (out.sites[ib].array() + half_width).matrix();
      p.vm = [](const Vec&) { return 0.0; };
      p.grad_vm = [m](const Vec&) { return Vec(Vec::Zero(m)); };
      p.hess_vm = [m](const Vec&) { return Mat(Mat::Zero(m, m)); };
      p.vp = [V = spec.V](const Vec& y) { return -V(y); };
      p.grad_vp = [g = spec.grad_V](const Vec& y) { return Vec(-g(y)); };
      p.hess_vp = [h = spec.hess_V](const Vec& y) { return Mat(-h(y)); };
      p.u = [b](const Vec& x, const Vec& y) {
        const Vec d = x - y;
        return 0.5 * d.dot(b * d);
      };
      p.grad_u_x = [b](const Vec& x, const Vec& y) { return Vec(b * (x - y)); };
      p.grad_u_y = [b](const Vec& x, const Vec& y) { return Vec(b * (y - x)); };
      p.hess_u_xx = [b](const Vec&, const Vec&) { return b; };
      p.hess_u_xy = [b](const Vec&, const Vec&) { return Mat(-b); };
      p.hess_u_yy = [b](const Vec&, const Vec&) { return b; };
      pieces.push_back(std::move(p));
    }
  }

  std::vector<symbolic::Edge> edges;
  for (std::size_t va = 0; va < out.vertex_sites.size(); ++va) {
    for (std::size_t vb = 0; vb < out.vertex_sites.size(); ++vb) {
      if (out.vertex_sites[va].second != out.vertex_sites[vb].first) continue;
      edges.push_back({static_cast<int>(edges.size()), static_cast<int>(va),
                       static_cast<int>(vb)});
    }
  }

  out.system = dls::DlsSystem(
      m, symbolic::TransitionGraph(vertex_ids, edges), std::move(pieces));
  for (const auto& e : out.system.graph().edges()) {
    const Vec& seed = out.sites[static_cast<std::size_t>(
        out.vertex_sites[static_cast<std::size_t>(e.src)].second)];
    out.system.set_edge_data(
        e.id, dls::find_critical_point(out.system, e.id, seed, half_width));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Strip billiard.

WallProfile cosine_wall(double amplitude, std::vector<double> seeds) {
  WallProfile w;
  w.f = [amplitude](double x) { return amplitude * std::cos(kTwoPi * x); };
  w.df = [amplitude](double x) {
    return -amplitude * kTwoPi * std::sin(kTwoPi * x);
  };
  w.d2f = [amplitude](double x) {
    return -amplitude * kTwoPi * kTwoPi * std::cos(kTwoPi * x);
  };
  w.seeds = std::move(seeds);
  return w;
}

WallProfile flat_wall(std::vector<double> seeds) {
  WallProfile w;
  w.f = [](double) { return 0.0; };
  w.df = [](double) { return 0.0; };
  w.d2f = [](double) { return 0.0; };
  w.seeds = std::move(seeds);
  return w;
}

WallProfile spline_wall(std::vector<double> samples,
                        std::vector<double> seeds) {
  auto spline = std::make_shared<PeriodicCubicSpline>(std::move(samples));
  WallProfile w;
  w.f = [spline](double x) { return spline->value(x); };
  w.df = [spline](double x) { return spline->deriv(x); };
  w.d2f = [spline](double x) { return spline->deriv2(x); };
  w.seeds = std::move(seeds);
  return w;
}

int StripSystem::vertex_for(int type, int src_site, int dst_site) const {
  for (std::size_t v = 0; v < vertex_info.size(); ++v) {
    if (vertex_info[v].type == type && vertex_info[v].src_site == src_site &&
        vertex_info[v].dst_site == dst_site)
      return static_cast<int>(v);
  }
  return -1;
}

int StripSystem::wall_of_point(const symbolic::Code& code,
                               std::size_t i) const {
  const auto& e = system.graph().edge(code.edges[i]);
  // The point is the arrival end of the piece on its left.
  return vertex_info[static_cast<std::size_t>(e.src)].type == 0 ? 1 : 0;
}

symbolic::Code StripSystem::code_for(int start_wall,
                                     const std::vector<int>& sites,
                                     bool periodic) const {
  const std::size_t n = sites.size();
  if (n == 0) throw Error("empty site path");
  if (periodic && n % 2 != 0)
    throw Error("periodic billiard path must have even length");

  std::map<std::pair<int, int>, int> edge_by_pair;
  for (const auto& e : system.graph().edges())
    edge_by_pair[{e.src, e.dst}] = e.id;

  auto wall_at = [&](std::size_t i) {
    return (start_wall + static_cast<int>(i)) % 2;
  };
  auto vertex_of = [&](int from_wall, int a, int b) {
    const int v = vertex_for(from_wall, a, b);
    if (v < 0) throw Error("site pair exceeds pair distance");
    return v;
  };
  auto nearest_opposite = [&](int wall, int site) {
    const auto& own = wall == 0 ? lower_sites : upper_sites;
    const auto& other = wall == 0 ? upper_sites : lower_sites;
    const double x = own[static_cast<std::size_t>(site)];
    int best = 0;
    for (std::size_t s = 1; s < other.size(); ++s) {
      if (std::abs(other[s] - x) <
          std::abs(other[static_cast<std::size_t>(best)] - x))
        best = static_cast<int>(s);
    }
    return best;
  };

  std::vector<int> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    int sp, sn;
    if (periodic) {
      sp = sites[(i + n - 1) % n];
      sn = sites[(i + 1) % n];
    } else {
      sp = i == 0 ? nearest_opposite(wall_at(0), sites[0]) : sites[i - 1];
      sn = i + 1 == n ? nearest_opposite(wall_at(n - 1), sites[n - 1])
                      : sites[i + 1];
    }
    const int wall_prev = (wall_at(i) + 1) % 2;
    const int va = vertex_of(wall_prev, sp, sites[i]);
    const int vb = vertex_of(wall_at(i), sites[i], sn);
    auto it = edge_by_pair.find({va, vb});
    if (it == edge_by_pair.end()) throw Error("edge not in graph");
    edges.push_back(it->second);
  }
  return periodic ? symbolic::Code::periodic(std::move(edges))
                  : symbolic::Code::window(std::move(edges));
}

StripSystem make_strip_billiard(const StripBilliardSpec& spec) {
  if (!(spec.width > 0.0)) throw Error("width must be positive");
  for (const WallProfile* w : {&spec.lower, &spec.upper}) {
    for (int i = 0; i < 256; ++i) {
      const double x = static_cast<double>(i) / 256.0;
      if (!(std::abs(w->f(x)) + 1.0 < spec.width / 4.0))
        throw Error("strip width invariant violated: |f| + 1 >= width/4");
    }
  }

  StripSystem out;
  out.width = spec.width;
  out.lower = spec.lower;
  out.upper = spec.upper;

  auto build_sites = [&](const WallProfile& w) {
    std::vector<double> base;
    if (spec.certify) {
      for (double s : w.seeds) {
        const double c = newton_scalar(w.df, w.d2f, s);
        base.push_back(c - std::floor(c));
      }
    } else {
      base = w.seeds;
    }
    base = dedupe_sorted(std::move(base), 1e-8);
    if (base.empty()) throw Error("model not anti-integrable");
    std::vector<double> lifted;
    for (int k = -spec.shifts; k <= spec.shifts; ++k) {
      for (double c : base) lifted.push_back(c + k);
    }
    std::sort(lifted.begin(), lifted.end());
    return lifted;
  };
  out.lower_sites = build_sites(spec.lower);
  out.upper_sites = build_sites(spec.upper);

  const double gap_lower = min_gap(out.lower_sites, 1.0);
  const double gap_upper = min_gap(out.upper_sites, 1.0);
  const double hw_lower = 0.375 * gap_lower;
  const double hw_upper = 0.375 * gap_upper;

  double pd = spec.pair_distance;
  if (std::isnan(pd)) pd = spec.shifts;

  struct WallFns {
    std::function<double(double)> g, dg, d2g;
  };
  // Departure and arrival elevation terms per piece type.
  const WallFns lower_neg{[f = spec.lower.f](double x) { return -f(x); },
                          [df = spec.lower.df](double x) { return -df(x); },
                          [d2 = spec.lower.d2f](double x) { return -d2(x); }};
  const WallFns upper_pos{spec.upper.f, spec.upper.df, spec.upper.d2f};

  std::vector<int> vertex_ids;
  std::vector<dls::LagrangianPiece> pieces;
  auto add_vertices = [&](int type) {
    const auto& src_sites = type == 0 ? out.lower_sites : out.upper_sites;
    const auto& dst_sites = type == 0 ? out.upper_sites : out.lower_sites;
    const double hw_src = type == 0 ? hw_lower : hw_upper;
    const double hw_dst = type == 0 ? hw_upper : hw_lower;
    const WallFns& gx = type == 0 ? lower_neg : upper_pos;
    const WallFns& gy = type == 0 ? upper_pos : lower_neg;
    for (std::size_t ia = 0; ia < src_sites.size(); ++ia) {
      for (std::size_t ib = 0; ib < dst_sites.size(); ++ib) {
        if (std::abs(dst_sites[ib] - src_sites[ia]) > pd) continue;
        const int id = static_cast<int>(out.vertex_info.size());
        out.vertex_info.push_back(
            {type, static_cast<int>(ia), static_cast<int>(ib)});
        vertex_ids.push_back(id);

        const double d = spec.width;
        auto len = [d, gx, gy](double x, double y) {
          const double dx = y - x;
          const double h = d + gx.g(x) + gy.g(y);
          return std::sqrt(dx * dx + h * h);
        };
        auto lx = [d, gx, gy, len](double x, double y) {
          const double h = d + gx.g(x) + gy.g(y);
          return (-(y - x) + h * gx.dg(x)) / len(x, y);
        };
        auto ly = [d, gx, gy, len](double x, double y) {
          const double h = d + gx.g(x) + gy.g(y);
          return ((y - x) + h * gy.dg(y)) / len(x, y);
        };

        dls::LagrangianPiece p;
        p.dim = 1;
        p.dom_x = dls::Box::cube(1, src_sites[ia] - hw_src,
                                 src_sites[ia] + hw_src);
        p.dom_y = dls::Box::cube(1, dst_sites[ib] - hw_dst,
                                 dst_sites[ib] + hw_dst);
        p.vm = [gx](const Vec& x) { return gx.g(x(0)); };
        p.grad_vm = [gx](const Vec& x) { return scalar_vec(gx.dg(x(0))); };
        p.hess_vm = [gx](const Vec& x) { return scalar_mat(gx.d2g(x(0))); };
        p.vp = [gy, d](const Vec& y) { return d + gy.g(y(0)); };
        p.grad_vp = [gy](const Vec& y) { return scalar_vec(gy.dg(y(0))); };
        p.hess_vp = [gy](const Vec& y) { return scalar_mat(gy.d2g(y(0))); };
        p.u = [d, gx, gy, len](const Vec& x, const Vec& y) {
          const double h = d + gx.g(x(0)) + gy.g(y(0));
          return len(x(0), y(0)) - h;
        };
        p.grad_u_x = [gx, lx](const Vec& x, const Vec& y) {
          return scalar_vec(lx(x(0), y(0)) - gx.dg(x(0)));
        };
        p.grad_u_y = [gy, ly](const Vec& x, const Vec& y) {
          return scalar_vec(ly(x(0), y(0)) - gy.dg(y(0)));
        };
        p.hess_u_xx = [d, gx, gy, len, lx](const Vec& x, const Vec& y) {
          const double h = d + gx.g(x(0)) + gy.g(y(0));
          const double l = len(x(0), y(0));
          const double v = lx(x(0), y(0));
          const double lxx =
              (1.0 + gx.dg(x(0)) * gx.dg(x(0)) + h * gx.d2g(x(0)) - v * v) /
              l;
          return scalar_mat(lxx - gx.d2g(x(0)));
        };
        p.hess_u_yy = [d, gx, gy, len, ly](const Vec& x, const Vec& y) {
          const double h = d + gx.g(x(0)) + gy.g(y(0));
          const double l = len(x(0), y(0));
          const double v = ly(x(0), y(0));
          const double lyy =
              (1.0 + gy.dg(y(0)) * gy.dg(y(0)) + h * gy.d2g(y(0)) - v * v) /
              l;
          return scalar_mat(lyy - gy.d2g(y(0)));
        };
        p.hess_u_xy = [gx, gy, len, lx, ly](const Vec& x, const Vec& y) {
          const double l = len(x(0), y(0));
          const double lxy = (-1.0 + gx.dg(x(0)) * gy.dg(y(0)) -
                              lx(x(0), y(0)) * ly(x(0), y(0))) /
                             l;
          return scalar_mat(lxy);
        };
        pieces.push_back(std::move(p));
      }
    }
  };
  add_vertices(0);
  add_vertices(1);

  std::vector<symbolic::Edge> edges;
  for (std::size_t va = 0; va < out.vertex_info.size(); ++va) {
    for (std::size_t vb = 0; vb < out.vertex_info.size(); ++vb) {
      if (out.vertex_info[va].type == out.vertex_info[vb].type) continue;
      if (out.vertex_info[va].dst_site != out.vertex_info[vb].src_site)
        continue;
      edges.push_back({static_cast<int>(edges.size()), static_cast<int>(va),
                       static_cast<int>(vb)});
    }
  }

  out.system = dls::DlsSystem(
      1, symbolic::TransitionGraph(vertex_ids, edges), std::move(pieces));

  if (spec.certify) {
    for (const auto& e : out.system.graph().edges()) {
      const auto& vi = out.vertex_info[static_cast<std::size_t>(e.src)];
      const auto& dst_sites = vi.type == 0 ? out.upper_sites : out.lower_sites;
      const double site = dst_sites[static_cast<std::size_t>(vi.dst_site)];
      const double hw = vi.type == 0 ? hw_upper : hw_lower;
      out.system.set_edge_data(
          e.id,
          dls::find_critical_point(out.system, e.id, scalar_vec(site), hw));
    }
  }
  return out;
}

double reflection_check(const StripSystem& sys, const dls::Orbit& orbit) {
  const auto& code = orbit.code;
  const std::size_t n = code.edges.size();
  const bool periodic = code.kind == symbolic::Code::Kind::periodic;
  if (n < (periodic ? 2u : 3u)) throw Error("orbit too short");

  auto embed = [&](std::size_t i) {
    const double x = orbit.points[i](0);
    if (sys.wall_of_point(code, i) == 0)
      return std::pair<double, double>{x, sys.lower.f(x)};
    return std::pair<double, double>{x, sys.width + sys.upper.f(x)};
  };

  double worst = 0.0;
  const std::size_t lo = periodic ? 0 : 1;
  const std::size_t hi = periodic ? n : n - 1;
  for (std::size_t i = lo; i < hi; ++i) {
    const auto [px, py] = embed((i + n - 1) % n);
    const auto [cx, cy] = embed(i);
    const auto [nx, ny] = embed((i + 1) % n);
    const double x = orbit.points[i](0);
    const double slope = sys.wall_of_point(code, i) == 0 ? sys.lower.df(x)
                                                         : sys.upper.df(x);
    const double tnorm = std::sqrt(1.0 + slope * slope);
    auto angle = [&](double vx, double vy) {
      const double vnorm = std::sqrt(vx * vx + vy * vy);
      const double c = (vx + vy * slope) / (vnorm * tnorm);
      return std::acos(std::clamp(c, -1.0, 1.0));
    };
    const double in = angle(cx - px, cy - py);
    const double outa = angle(nx - cx, ny - cy);
    worst = std::max(worst, std::abs(in - outa));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Separatrix map.

namespace {

std::size_t sigma_slot(int sigma) {
  if (sigma == -1) return 0;
  if (sigma == 1) return 1;
  throw Error("sigma label must be -1 or +1");
}

}  // namespace

int SepSystem::vertex_for(long long k, int sigma, int theta) const {
  for (std::size_t v = 0; v < vertex_info.size(); ++v) {
    if (vertex_info[v].k == k && vertex_info[v].sigma == sigma &&
        vertex_info[v].theta == theta)
      return static_cast<int>(v);
  }
  return -1;
}

int SepSystem::edge_for(int src_vertex, int dst_vertex, int well) const {
  int count = 0;
  for (const auto& e : system.graph().edges()) {
    if (e.src != src_vertex || e.dst != dst_vertex) continue;
    if (count == well) return e.id;
    ++count;
  }
  return -1;
}

SepSystem make_sepmap(const SepMapSpec& spec) {
  if (!(spec.lambda_s > 0.0)) throw Error("lambda_s must be positive");
  if (!(spec.c1 > 0.0)) throw Error("c1 must be positive");
  double c2 = spec.c2;
  if (std::isnan(c2)) c2 = spec.c1 + 10.0;
  if (c2 < spec.c1) throw Error("c2 must be at least c1");
  const long long k_lo = static_cast<long long>(std::ceil(spec.c1));
  const long long k_hi = static_cast<long long>(std::floor(c2));
  if (k_lo > k_hi) throw Error("no admissible jumps");

  SepSystem out;
  out.lambda_s = spec.lambda_s;
  out.omega_hat = spec.omega_hat;

  for (int s = 0; s < 2; ++s) {
    if (!spec.V[s].f || !spec.V[s].df || !spec.V[s].d2f)
      throw Error("potential evaluators missing");
    std::vector<double> base;
    for (double seed : spec.seeds[s]) {
      const double c = newton_scalar(spec.V[s].df, spec.V[s].d2f, seed);
      base.push_back(c - std::floor(c));
    }
    base = dedupe_sorted(std::move(base), 1e-8);
    if (base.empty()) throw Error("model not anti-integrable");
    out.wells[s] = std::move(base);
  }

  // One box covering the wells of each label with margin away from the next
  // well over the period.
  std::array<dls::Box, 2> box;
  std::array<double, 2> margin{};
  for (int s = 0; s < 2; ++s) {
    const auto& w = out.wells[s];
    double g = 1.0;
    for (std::size_t i = 1; i < w.size(); ++i)
      g = std::min(g, w[i] - w[i - 1]);
    if (w.size() > 1) g = std::min(g, w.front() + 1.0 - w.back());
    margin[s] = 0.375 * g;
    box[s] = dls::Box::cube(1, w.front() - margin[s], w.back() + margin[s]);
  }

  std::vector<int> vertex_ids;
  std::vector<dls::LagrangianPiece> pieces;
  for (long long k = k_lo; k <= k_hi; ++k) {
    for (int sigma : {-1, 1}) {
      for (int theta : {-1, 1}) {
        const int id = static_cast<int>(out.vertex_info.size());
        out.vertex_info.push_back({k, sigma, theta});
        vertex_ids.push_back(id);

        const std::size_t s = sigma_slot(sigma);
        const std::size_t s_next = sigma_slot(sigma * theta);
        const double shift =
            static_cast<double>(k) + spec.omega_hat[s];
        const double ls = spec.lambda_s;
        const double th = theta;
        const bool drop = spec.drop_coupling;
        auto expo = [ls, shift, th, drop](double x, double y) {
          if (drop) return 0.0;
          return th * std::exp(ls * (y - x - shift));
        };

        dls::LagrangianPiece p;
        p.dim = 1;
        p.dom_x = box[s];
        p.dom_y = box[s_next];
        p.vm = [f = spec.V[s].f](const Vec& x) { return f(x(0)); };
        p.grad_vm = [df = spec.V[s].df](const Vec& x) {
          return scalar_vec(df(x(0)));
        };
        p.hess_vm = [d2 = spec.V[s].d2f](const Vec& x) {
          return scalar_mat(d2(x(0)));
        };
        p.vp = [](const Vec&) { return 0.0; };
        p.grad_vp = [](const Vec&) { return scalar_vec(0.0); };
        p.hess_vp = [](const Vec&) { return scalar_mat(0.0); };
        p.u = [expo](const Vec& x, const Vec& y) { return expo(x(0), y(0)); };
        p.grad_u_x = [expo, ls](const Vec& x, const Vec& y) {
          return scalar_vec(-ls * expo(x(0), y(0)));
        };
        p.grad_u_y = [expo, ls](const Vec& x, const Vec& y) {
          return scalar_vec(ls * expo(x(0), y(0)));
        };
        p.hess_u_xx = [expo, ls](const Vec& x, const Vec& y) {
          return scalar_mat(ls * ls * expo(x(0), y(0)));
        };
        p.hess_u_yy = [expo, ls](const Vec& x, const Vec& y) {
          return scalar_mat(ls * ls * expo(x(0), y(0)));
        };
        p.hess_u_xy = [expo, ls](const Vec& x, const Vec& y) {
          return scalar_mat(-ls * ls * expo(x(0), y(0)));
        };
        pieces.push_back(std::move(p));
      }
    }
  }

  std::vector<symbolic::Edge> edges;
  std::vector<std::pair<std::size_t, std::size_t>> edge_well;
  for (std::size_t va = 0; va < out.vertex_info.size(); ++va) {
    const int sigma_next =
        out.vertex_info[va].sigma * out.vertex_info[va].theta;
    for (std::size_t vb = 0; vb < out.vertex_info.size(); ++vb) {
      if (out.vertex_info[vb].sigma != sigma_next) continue;
      const std::size_t s = sigma_slot(sigma_next);
      for (std::size_t w = 0; w < out.wells[s].size(); ++w) {
        edges.push_back({static_cast<int>(edges.size()),
                         static_cast<int>(va), static_cast<int>(vb)});
        edge_well.emplace_back(s, w);
      }
    }
  }

  out.system = dls::DlsSystem(
      1, symbolic::TransitionGraph(vertex_ids, edges), std::move(pieces));

  for (const auto& e : out.system.graph().edges()) {
    const auto [s, w] = edge_well[static_cast<std::size_t>(e.id)];
    out.system.set_edge_data(
        e.id, dls::find_critical_point(out.system, e.id,
                                       scalar_vec(out.wells[s][w]),
                                       margin[s]));
  }

  if (!spec.drop_coupling) {
    const auto rep = dls::uniformity_report(out.system);
    if (!rep.satisfied)
      throw CertificationError("uniformity condition violated");
  }
  return out;
}

SepCheckReport sepmap_generating_check(const SepSystem& sys,
                                       const dls::Orbit& orbit,
                                       const SepMapSpec& spec) {
  const auto& code = orbit.code;
  const std::size_t n = code.edges.size();
  const bool periodic = code.kind == symbolic::Code::Kind::periodic;
  if (n < (periodic ? 1u : 3u)) throw Error("orbit too short");

  const double ls = sys.lambda_s;
  auto piece_info = [&](std::size_t i) {
    const auto& e = sys.system.graph().edge(code.edges[i]);
    return sys.vertex_info[static_cast<std::size_t>(e.dst)];
  };

  // Unwound positions: every piece drops the configuration by its jump.
  // For momenta, only consecutive differences matter.
  auto step = [&](std::size_t i) {
    // X_{i+1} - X_i for the piece between points i and i+1.
    const auto info = piece_info(i);
    return orbit.points[(i + 1) % n](0) - orbit.points[i](0) -
           static_cast<double>(info.k);
  };
  auto momentum = [&](std::size_t i) {
    // y_i from the piece between points i-1 and i.
    const std::size_t prev = (i + n - 1) % n;
    const auto info = piece_info(prev);
    const std::size_t s = sigma_slot(info.sigma);
    return static_cast<double>(info.theta) * ls * ls *
           std::exp(ls * (step(prev) - sys.omega_hat[s]));
  };

  SepCheckReport rep;
  const std::size_t lo = periodic ? 0 : 1;
  const std::size_t hi = periodic ? n : n - 2;
  for (std::size_t i = lo; i < hi; ++i) {
    const auto info = piece_info(i);
    const std::size_t s = sigma_slot(info.sigma);
    const double y_cur = momentum(i);
    const double y_next = momentum((i + 1) % n);
    const double x = orbit.points[i](0);

    const double defect_y =
        std::abs(y_next - y_cur - ls * spec.V[s].df(x));
    const double omega = ls * sys.omega_hat[s] - std::log(ls * ls);
    const double defect_x = std::abs(
        step(i) - (omega + std::log(std::abs(y_next))) / ls);
    rep.max_defect = std::max({rep.max_defect, defect_y, defect_x});

    // The piece between points i and i+1 carries theta for point i+1.
    const auto next_info = piece_info((i + 1) % n);
    const int sign_y = y_next > 0.0 ? 1 : -1;
    if (info.theta != sign_y) rep.labels_ok = false;
    if (next_info.sigma != info.sigma * info.theta) rep.labels_ok = false;
  }
  return rep;
}

}  // namespace ail::models
