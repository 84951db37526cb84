#pragma once

#include <string>
#include <vector>

#include "ail/dls.hpp"
#include "ail/standard_map.hpp"

namespace ail::hyperbolicity {

using dls::Mat;
using dls::Vec;

struct ConeParams {
  double alpha_h = 0.5;
  double alpha_v = 0.5;
  double mu = 2.0;
};

// Coefficients of the variational equation along an orbit,
//   g_minus[i] u_{i-1} + g_center[i] u_i + g_plus[i] u_{i+1} = 0,
// together with the equivalent fixed-point form
//   u_i = p[i] u_{i-1} + q[i] u_i + r[i] u_{i+1}.
// For window orbits only interior indices carry blocks; index[j] maps block
// slot j back to the orbit index.
struct VariationalBlocks {
  int dim = 1;
  bool periodic = false;
  std::vector<long> index;
  std::vector<Mat> g_minus, g_center, g_plus;
  std::vector<Mat> p, q, r;
};

VariationalBlocks variational_blocks(const dls::DlsSystem& sys,
                                     const dls::Orbit& orbit);

// Closed-form blocks for a standard-map orbit.
VariationalBlocks variational_blocks(const smap::Orbit& orbit,
                                     double coupling);

struct ConeReport {
  bool pass = false;
  std::string tier;
  double mu_measured = 0.0;
  long worst_index = -1;
  double log_mu = 0.0;
};

// Cone-criterion check.  Scalar systems get the exact two-cone verification;
// higher dimensions a certified norm bound (mu >= 2) with a sampled
// fallback.  All-zero coupling blocks yield the "ai-limit-degenerate" tier.
ConeReport cone_verify(const VariationalBlocks& blocks,
                       const ConeParams& cones = {});

// Bounded solution of the variational equation with u_0 = u0 and zero tail
// beyond the horizon; certifies the stable direction by contraction.
std::vector<Vec> stable_vector(const VariationalBlocks& blocks, const Vec& u0,
                               int horizon);

}  // namespace ail::hyperbolicity
