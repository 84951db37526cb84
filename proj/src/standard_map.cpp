#include "ail/standard_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

namespace ail::smap {

namespace {

constexpr double kPi = std::numbers::pi;

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !(sigma < kPi / 2.0))
    throw Error("sigma outside (0, pi/2)");
}

}  // namespace

double lambda0(double Lambda, double sigma) {
  check_sigma(sigma);
  if (!(Lambda > 0.0)) throw Error("Lambda must be positive");
  return std::max((Lambda + 4.0 * sigma) / std::sin(sigma),
                  8.0 / std::cos(sigma));
}

std::pair<double, double> map_forward(double x, double y, double coupling) {
  const double y_next = y + coupling * std::sin(x);
  return {x + y_next, y_next};
}

double step_lagrangian(double x_prev, double x, double coupling) {
  return 2.0 * x - x_prev + coupling * std::sin(x);
}

double residual_sml(const std::vector<double>& points, double coupling,
                    bool periodic) {
  const std::size_t n = points.size();
  if (n < 3 && !periodic) return 0.0;
  double worst = 0.0;
  const std::size_t lo = periodic ? 0 : 1;
  const std::size_t hi = periodic ? n : n - 1;
  for (std::size_t k = lo; k < hi; ++k) {
    const double prev = points[(k + n - 1) % n];
    const double next = points[(k + 1) % n];
    const double r =
        next - 2.0 * points[k] + prev - coupling * std::sin(points[k]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

Orbit shadow_code(const symbolic::StandardCode& code, const Params& params) {
  check_sigma(params.sigma);
  if (params.coupling == 0.0) throw Error("coupling must be nonzero");
  if (params.Lambda > 0.0 && !symbolic::standard_code_check(code, params.Lambda))
    throw Error("code violates second-difference bound");
  const std::size_t n = code.multiples.size();
  if (n == 0) throw Error("empty code");
  if (!code.periodic && n < 3) throw Error("window code too short");

  const double sin_sigma = std::sin(params.sigma);
  std::vector<double> a(n), x(n);
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = kPi * static_cast<double>(code.multiples[k]);
    x[k] = a[k];
  }

  const std::size_t lo = code.periodic ? 0 : 1;
  const std::size_t hi = code.periodic ? n : n - 1;

  Orbit orbit;
  orbit.code = code;

  double delta_prev = std::numeric_limits<double>::quiet_NaN();
  int bad_streak = 0;
  int sweeps = 0;
  bool converged = false;
  while (sweeps < params.max_iterations) {
    ++sweeps;
    std::vector<double> next = x;
    double delta = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const double prev_pt = x[(k + n - 1) % n];
      const double next_pt = x[(k + 1) % n];
      const double s =
          (next_pt - 2.0 * x[k] + prev_pt) / params.coupling;
      if (!(std::abs(s) < sin_sigma))
        throw CertificationError("left arcsin domain");
      const double dev = std::asin(s);
      const bool even = (code.multiples[k] % 2) == 0;
      next[k] = even ? a[k] + dev : a[k] - dev;
      delta = std::max(delta, std::abs(next[k] - x[k]));
    }
    x = std::move(next);
    if (!std::isnan(delta_prev) && delta_prev > 10.0 * params.tol) {
      const double ratio = delta / delta_prev;
      orbit.contraction_estimate = std::max(orbit.contraction_estimate, ratio);
      bad_streak = ratio >= 1.0 ? bad_streak + 1 : 0;
      if (bad_streak >= 10)
        throw CertificationError("contraction failure: eps too large");
    }
    delta_prev = delta;
    if (delta <= params.tol) {
      converged = true;
      break;
    }
  }

  orbit.points = std::move(x);
  orbit.iterations = sweeps;
  orbit.converged = converged;
  for (std::size_t k = 0; k < n; ++k)
    orbit.rho = std::max(orbit.rho, std::abs(orbit.points[k] - a[k]));
  orbit.residual =
      residual_sml(orbit.points, params.coupling, code.periodic);
  return orbit;
}

DecayReport decay_check(const symbolic::StandardCode& a,
                        const symbolic::StandardCode& b, long long n,
                        const Params& params) {
  if (a.periodic != b.periodic || a.size() != b.size() ||
      a.first_index != b.first_index)
    throw Error("codes are not comparable");
  for (std::size_t k = 0; k < a.size(); ++k) {
    const long long idx = a.first_index + static_cast<long long>(k);
    if (std::llabs(idx) <= n && a.multiples[k] != b.multiples[k])
      throw Error("codes differ inside the agreement range");
  }
  const Orbit oa = shadow_code(a, params);
  const Orbit ob = shadow_code(b, params);
  DecayReport rep;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const long long idx = a.first_index + static_cast<long long>(k);
    if (std::llabs(idx) > n) continue;
    const double bound =
        2.0 * params.sigma *
        std::pow(5.0, static_cast<double>(std::llabs(idx) - n));
    const double ratio = std::abs(oa.points[k] - ob.points[k]) / bound;
    if (ratio > rep.ratio) {
      rep.ratio = ratio;
      rep.worst_index = idx;
    }
  }
  rep.pass = rep.ratio <= 1.0;
  return rep;
}

symbolic::StandardCode window_from_cycle(const std::vector<long long>& beta,
                                         long long half_width) {
  if (beta.empty()) throw Error("empty cycle");
  if (half_width < 1) throw Error("half width must be positive");
  const long long p = static_cast<long long>(beta.size());
  auto beta_at = [&](long long k) {
    return beta[static_cast<std::size_t>(((k % p) + p) % p)];
  };
  const long long lo = -half_width;
  const long long hi = half_width;
  std::vector<long long> m(static_cast<std::size_t>(hi - lo + 1), 0);
  auto at = [&](long long k) -> long long& {
    return m[static_cast<std::size_t>(k - lo)];
  };
  at(0) = 0;
  if (hi >= 1) at(1) = 0;
  // Second difference at k equals beta(k): m_{k+1} = 2 m_k - m_{k-1} + beta_k.
  for (long long k = 1; k < hi; ++k)
    at(k + 1) = 2 * at(k) - at(k - 1) + beta_at(k);
  for (long long k = 0; k > lo; --k)
    at(k - 1) = 2 * at(k) - at(k + 1) + beta_at(k);

  symbolic::StandardCode code;
  code.multiples = std::move(m);
  code.periodic = false;
  code.first_index = lo;
  return code;
}

std::vector<std::pair<double, double>> quotient_project(const Orbit& orbit) {
  const double period = 2.0 * kPi;
  auto wrap = [&](double v) {
    double r = std::fmod(v, period);
    if (r < 0.0) r += period;
    return r;
  };
  std::vector<std::pair<double, double>> out;
  const std::size_t n = orbit.points.size();
  if (n < 2) return out;
  const std::size_t pairs = orbit.code.periodic ? n : n - 1;
  out.reserve(pairs);
  for (std::size_t k = 0; k < pairs; ++k)
    out.emplace_back(wrap(orbit.points[k]),
                     wrap(orbit.points[(k + 1) % n]));
  return out;
}

}  // namespace ail::smap
