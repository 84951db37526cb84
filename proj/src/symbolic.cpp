#include "ail/symbolic.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace ail::symbolic {

TransitionGraph::TransitionGraph(std::vector<int> vertices,
                                 std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertex_pos_.emplace(vertices_[i], i).second)
      throw Error("duplicate vertex id");
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (!vertex_pos_.count(e.src) || !vertex_pos_.count(e.dst))
      throw Error("edge endpoint not a vertex");
    if (!edge_pos_.emplace(e.id, i).second) throw Error("duplicate edge id");
    out_[e.src].push_back(e.id);
    in_[e.dst].push_back(e.id);
  }
  for (int v : vertices_) {
    out_.try_emplace(v);
    in_.try_emplace(v);
  }
}

const Edge& TransitionGraph::edge(int id) const {
  auto it = edge_pos_.find(id);
  if (it == edge_pos_.end()) throw Error("edge not in graph");
  return edges_[it->second];
}

std::size_t TransitionGraph::vertex_pos(int v) const {
  auto it = vertex_pos_.find(v);
  if (it == vertex_pos_.end()) throw Error("vertex not in graph");
  return it->second;
}

const std::vector<int>& TransitionGraph::out_edges(int v) const {
  auto it = out_.find(v);
  if (it == out_.end()) throw Error("vertex not in graph");
  return it->second;
}

const std::vector<int>& TransitionGraph::in_edges(int v) const {
  auto it = in_.find(v);
  if (it == in_.end()) throw Error("vertex not in graph");
  return it->second;
}

std::vector<std::vector<std::uint64_t>> TransitionGraph::adjacency_counts()
    const {
  const std::size_t n = vertices_.size();
  std::vector<std::vector<std::uint64_t>> a(n,
                                            std::vector<std::uint64_t>(n, 0));
  for (const Edge& e : edges_)
    a[vertex_pos_.at(e.src)][vertex_pos_.at(e.dst)] += 1;
  return a;
}

Code Code::periodic(std::vector<int> edges) {
  return Code{Kind::periodic, std::move(edges)};
}

Code Code::window(std::vector<int> edges) {
  return Code{Kind::window, std::move(edges)};
}

bool is_admissible(const Code& code, const TransitionGraph& graph) {
  const auto& ids = code.edges;
  if (ids.empty()) return true;
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    if (graph.edge(ids[i]).dst != graph.edge(ids[i + 1]).src) return false;
  }
  if (code.kind == Code::Kind::periodic) {
    if (graph.edge(ids.back()).dst != graph.edge(ids.front()).src)
      return false;
  }
  return true;
}

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Error("word count overflow");
  return r;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error("word count overflow");
  return r;
}

}  // namespace

std::uint64_t count_words(const TransitionGraph& graph, int n) {
  if (n < 1) throw Error("word length must be positive");
  const auto a = graph.adjacency_counts();
  const std::size_t m = graph.vertices().size();
  // v = A^{n-1} * ones, accumulated column-wise; the result is ones^T v.
  std::vector<std::uint64_t> v(m, 1);
  for (int step = 1; step < n; ++step) {
    std::vector<std::uint64_t> next(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      std::uint64_t acc = 0;
      for (std::size_t j = 0; j < m; ++j) {
        if (a[i][j] == 0 || v[j] == 0) continue;
        acc = checked_add(acc, checked_mul(a[i][j], v[j]));
      }
      next[i] = acc;
    }
    v = std::move(next);
  }
  std::uint64_t total = 0;
  for (std::uint64_t x : v) total = checked_add(total, x);
  return total;
}

double StandardCode::a(std::size_t k) const {
  return std::numbers::pi * static_cast<double>(multiples.at(k));
}

bool standard_code_check(const StandardCode& code, double Lambda) {
  const auto& m = code.multiples;
  const std::size_t n = m.size();
  if (n < 3 && !code.periodic) return true;
  if (n == 0) return true;
  auto second_diff = [&](std::size_t k_prev, std::size_t k, std::size_t k_next) {
    const double d = std::numbers::pi *
                     static_cast<double>(m[k_prev] - 2 * m[k] + m[k_next]);
    return std::abs(d);
  };
  if (code.periodic) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t p = (k + n - 1) % n;
      const std::size_t q = (k + 1) % n;
      if (second_diff(p, k, q) > Lambda) return false;
    }
    return true;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (second_diff(k - 1, k, k + 1) > Lambda) return false;
  }
  return true;
}

bool standard_code_check(const StandardCode& code) {
  if (std::isnan(code.bound)) throw Error("code carries no bound");
  return standard_code_check(code, code.bound);
}

}  // namespace ail::symbolic
