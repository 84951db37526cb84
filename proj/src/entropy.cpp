#include "ail/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace ail::entropy {

TmcResult tmc_entropy(const symbolic::TransitionGraph& graph) {
  if (graph.vertices().empty()) throw Error("empty graph");

  // Trim vertices that cannot lie on a bi-infinite path: repeatedly remove
  // those with no incoming or no outgoing edge among the survivors.
  std::set<int> alive(graph.vertices().begin(), graph.vertices().end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = alive.begin(); it != alive.end();) {
      int v = *it;
      bool has_in = false, has_out = false;
      for (int id : graph.out_edges(v)) {
        if (alive.count(graph.edge(id).dst)) {
          has_out = true;
          break;
        }
      }
      for (int id : graph.in_edges(v)) {
        if (alive.count(graph.edge(id).src)) {
          has_in = true;
          break;
        }
      }
      if (!has_in || !has_out) {
        it = alive.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }

  TmcResult res;
  res.core_vertices = alive.size();
  if (alive.empty()) {
    res.no_recurrent_part = true;
    return res;
  }

  std::vector<int> verts(alive.begin(), alive.end());
  const std::size_t n = verts.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (int id : graph.out_edges(verts[i])) {
      const auto& e = graph.edge(id);
      if (!alive.count(e.dst)) continue;
      const auto j = static_cast<std::size_t>(
          std::lower_bound(verts.begin(), verts.end(), e.dst) -
          verts.begin());
      a[i][j] += 1.0;
    }
  }

  // Power iteration on A + I: the shift keeps periodic cores converging and
  // moves the Perron root to rho(A) + 1.
  std::vector<double> v(n, 1.0), next(n, 0.0);
  double est = 0.0;
  int it = 0;
  for (; it < 1000000; ++it) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = v[i];
      for (std::size_t j = 0; j < n; ++j) acc += a[i][j] * v[j];
      next[i] = acc;
      norm = std::max(norm, std::abs(acc));
    }
    for (std::size_t i = 0; i < n; ++i) next[i] /= norm;
    const double prev_est = est;
    est = norm;
    v.swap(next);
    if (it > 0 && std::abs(est - prev_est) <= 1e-10 * std::abs(est)) break;
  }
  res.iterations = it + 1;
  res.spectral_radius = est - 1.0;
  // The core has a bi-infinite path through every vertex, so rho >= 1.
  res.entropy =
      res.spectral_radius > 1.0 ? std::log(res.spectral_radius) : 0.0;
  return res;
}

std::vector<double> word_count_entropy(const symbolic::TransitionGraph& graph,
                                       int n_max) {
  if (n_max < 1) throw Error("word length must be positive");
  std::vector<double> h;
  h.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    const auto theta = symbolic::count_words(graph, n);
    if (theta == 0) {
      h.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    h.push_back(std::log(static_cast<double>(theta)) / n);
  }
  return h;
}

SmBound standard_map_entropy_bound(double lambda, double sigma) {
  if (!(sigma > 0.0) || !(sigma < std::numbers::pi / 2.0))
    throw Error("sigma outside (0, pi/2)");
  const double abs_lambda = std::abs(lambda);
  if (abs_lambda < 8.0 / std::cos(sigma))
    throw Error("below threshold, no bound");
  SmBound b;
  b.lambda = lambda;
  b.sigma = sigma;
  b.Lambda_star = abs_lambda * std::sin(sigma) - 4.0 * sigma;
  if (b.Lambda_star <= 0.0) {
    b.q = 1;
    b.bound_nats = 0.0;
    return b;
  }
  b.q = 1 + 2 * static_cast<long long>(
                  std::floor(b.Lambda_star / std::numbers::pi));
  b.bound_nats = std::log(static_cast<double>(b.q));
  return b;
}

SmBound optimize_entropy_bound(double lambda) {
  bool found = false;
  SmBound best;
  for (int k = 1; k <= 30; ++k) {
    const double sigma = 0.05 * k;
    if (std::abs(lambda) < 8.0 / std::cos(sigma)) continue;
    const SmBound b = standard_map_entropy_bound(lambda, sigma);
    if (!found || b.bound_nats > best.bound_nats) {
      best = b;
      found = true;
    }
  }
  if (!found) throw Error("below threshold, no bound");
  return best;
}

}  // namespace ail::entropy
