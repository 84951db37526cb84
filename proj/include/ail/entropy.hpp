#pragma once

#include <vector>

#include "ail/symbolic.hpp"

namespace ail::entropy {

struct TmcResult {
  double entropy = 0.0;
  double spectral_radius = 0.0;
  int iterations = 0;
  std::size_t core_vertices = 0;
  bool no_recurrent_part = false;
};

// log of the spectral radius of the multiplicity adjacency matrix, after
// trimming vertices that carry no bi-infinite paths.
TmcResult tmc_entropy(const symbolic::TransitionGraph& graph);

// Finite-n estimates (1/n) log count_words(n) for n = 1..n_max.
std::vector<double> word_count_entropy(const symbolic::TransitionGraph& graph,
                                       int n_max);

struct SmBound {
  double lambda = 0.0;
  double sigma = 0.0;
  double Lambda_star = 0.0;
  long long q = 1;
  double bound_nats = 0.0;
};

// Certified lower bound log q for the standard map at the given coupling,
// via the largest admissible second-difference bound at radius sigma.
SmBound standard_map_entropy_bound(double lambda, double sigma);

// Best bound over the sigma grid 0.05, 0.10, ..., 1.50.
SmBound optimize_entropy_bound(double lambda);

}  // namespace ail::entropy
