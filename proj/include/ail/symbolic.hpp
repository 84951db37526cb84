#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ail {

// Base error type for the library.  CertificationError marks a failed
// certification step (contraction breakdown, domain guard, cone criterion),
// as opposed to malformed input or usage mistakes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CertificationError : Error {
  using Error::Error;
};

namespace symbolic {

struct Edge {
  int id;
  int src;
  int dst;
};

// Finite directed multigraph over integer vertex ids.  Parallel edges are
// allowed and carry distinct ids.  Immutable after construction, so instances
// can be shared freely between threads.
class TransitionGraph {
 public:
  TransitionGraph() = default;
  TransitionGraph(std::vector<int> vertices, std::vector<Edge> edges);

  const std::vector<int>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_vertex(int v) const { return vertex_pos_.count(v) != 0; }
  bool has_edge(int id) const { return edge_pos_.count(id) != 0; }

  // Throws Error("edge not in graph") for unknown ids.
  const Edge& edge(int id) const;

  // Position of a vertex in vertices(); throws for unknown vertices.
  std::size_t vertex_pos(int v) const;

  // Edge ids leaving v, in insertion order.
  const std::vector<int>& out_edges(int v) const;
  const std::vector<int>& in_edges(int v) const;

  // Vertex-by-vertex adjacency counts (parallel edges add up).
  std::vector<std::vector<std::uint64_t>> adjacency_counts() const;

 private:
  std::vector<int> vertices_;
  std::vector<Edge> edges_;
  std::unordered_map<int, std::size_t> vertex_pos_;
  std::unordered_map<int, std::size_t> edge_pos_;
  std::unordered_map<int, std::vector<int>> out_;
  std::unordered_map<int, std::vector<int>> in_;
};

// A symbolic code: a composable sequence of edge ids, either a cycle
// (periodic) or a finite window with pinned ends.
struct Code {
  enum class Kind { periodic, window };

  Kind kind = Kind::periodic;
  std::vector<int> edges;

  static Code periodic(std::vector<int> edges);
  static Code window(std::vector<int> edges);

  std::size_t size() const { return edges.size(); }
};

// True when consecutive edges chain head-to-tail (cyclically for periodic
// codes).  Unknown edge ids throw Error("edge not in graph").
bool is_admissible(const Code& code, const TransitionGraph& graph);

// Number of admissible symbol words of length n (n >= 1), counted with edge
// multiplicity.  Exact integer arithmetic; throws Error("word count
// overflow") when the count exceeds the 64-bit range.
std::uint64_t count_words(const TransitionGraph& graph, int n);

// Code for the standard map: integer multiples m_k of pi, so a_k = pi * m_k.
// Window codes occupy indices first_index .. first_index + size - 1.
struct StandardCode {
  std::vector<long long> multiples;
  bool periodic = true;
  long long first_index = 0;
  // Optional second-difference bound; NaN when the bound comes from the
  // run parameters instead.
  double bound = std::numeric_limits<double>::quiet_NaN();

  std::size_t size() const { return multiples.size(); }
  double a(std::size_t k) const;
};

// Checks |a_{k-1} - 2 a_k + a_{k+1}| <= Lambda at every interior index
// (every index, cyclically, for periodic codes).
bool standard_code_check(const StandardCode& code, double Lambda);

// Same, using the bound stored on the code.
bool standard_code_check(const StandardCode& code);

}  // namespace symbolic
}  // namespace ail
