#pragma once

#include "levypw/graphs.hpp"
#include "levypw/lattice.hpp"
#include "levypw/levy.hpp"

#include <string>
#include <vector>

namespace levypw {

// Graded composite trapezoid rule for the vertex time integrals. Grids are
// geometric near 0 where the heat-kernel products vary fastest. Node budgets
// shrink with nesting depth; one-dimensional integrals get a boosted budget so
// the propagator-level tolerances hold.
struct QuadratureSpec {
  double t_max = 0;         // integration horizon; 0 means 10 / m^2
  int nodes_per_unit = 150; // per unit of t_max * m^2, for 2-deep nests

  void validate() const;
  double horizon(double m) const;
  int nodes_for(int dims, double theta) const; // theta = horizon * m^2
};

// nodes 0 = u_0 < u_1 < ... < u_N = T, denser near 0
std::vector<double> graded_grid(double T, int N, double beta);

enum class EvalMethod { Auto, Quadrature, Momentum };

// Equilibrium value of a connected graph without initial-condition leaves:
// roots at time 0 and the given sites, inner and empty vertices integrated
// over negative times (truncated at -t_max), cumulant factor per empty vertex.
// Tree multiplicities are applied by the series assembly, not here. Depends on
// root sites only through differences.
double evaluate_graph_equilibrium(const SimplifiedGraph& g,
                                  const std::vector<long long>& root_sites,
                                  const CumulantSet& cums, const LatticeConfig& cfg,
                                  const QuadratureSpec& quad,
                                  EvalMethod method = EvalMethod::Auto);

// Same value as a field over the lag x_1 - x_0 (1 or 2 roots only; for one
// root the field is constant).
Field equilibrium_lag_field(const SimplifiedGraph& g, const CumulantSet& cums,
                            const Lattice& lat, const QuadratureSpec& quad,
                            EvalMethod method = EvalMethod::Auto);

// Closed-form path: fundamental-cycle momentum assignment plus the sum over
// linear extensions of the vertex time order; exact up to mode sums.
// Connected equilibrium graphs with 1 or 2 roots and no init leaves.
Field equilibrium_lag_field_momentum(const SimplifiedGraph& g, const CumulantSet& cums,
                                     const Lattice& lat);

// Roots at common time t > 0, vertices integrated over (0, t], init leaves
// pinned at time 0 carrying the initial value. Only uniform initial data is
// supported here (f enters through its constant value); positional initial
// data lives on the trajectory-level ops.
double evaluate_graph_finite_t(const SimplifiedGraph& g, double t,
                               const std::vector<long long>& root_sites,
                               const CumulantSet& cums, double f0,
                               const LatticeConfig& cfg, const QuadratureSpec& quad);

Field finite_t_lag_field(const SimplifiedGraph& g, double t, const CumulantSet& cums,
                         double f0, const Lattice& lat, const QuadratureSpec& quad);

// Truncated n-point correlation series up to order M: per order, the values of
// all connected graphs (even-pruned when all odd cumulants vanish, or when
// even_only is forced) and the assembled coefficient of lambda^m carrying the
// (-1)^m sign of the drift term. n in {1, 2}; the lag grid is the full torus.
struct SeriesCoefficients {
  int n = 2;
  std::vector<std::vector<std::pair<std::string, Field>>> graph_values; // [m][graph]
  std::vector<Field> coefficient;                                       // [m], sign included
};

SeriesCoefficients truncated_correlation_series(int n, int M, const CumulantSet& cums,
                                                const LatticeConfig& cfg,
                                                const QuadratureSpec& quad,
                                                bool equilibrium, bool drop_tadpoles,
                                                int p = 3,
                                                EvalMethod method = EvalMethod::Auto,
                                                bool even_only = false, double t = 0,
                                                double f0 = 0, int threads = 0);

// First-order two-point kernels: P1 = order-0 value per unit c2; P2 = order-1
// coefficient per unit c4 (4-leg empty vertex, sign included, negative); PT =
// order-1 coefficient per unit c2^2 (vertex legs closed onto 2-leg empty
// vertices, sign included).
struct FirstOrderKernels {
  Field P1, P2, PT;
};
FirstOrderKernels first_order_kernels(const Lattice& lat, const QuadratureSpec& quad,
                                      EvalMethod method = EvalMethod::Auto, int p = 3);

Field assemble_two_point(const FirstOrderKernels& k, double c2, double c4, double lambda,
                         bool include_tadpole);

// Perturbative recursion on a sampled noise realization. Fields are indexed by
// step k (time k dt); the increment for step j acts from time (j+1) dt on.
// X_0[k] = sum_{j<k} G_{(k-j-1)dt} * W_j + G_{k dt} * f,
// X_J[k] = dt sum_{l<k} G_{(k-l)dt} * (sum over child-order multisets of the
// multinomial coefficient times the product of lower fields at l).
std::vector<std::vector<Field>> perturbative_solution(int J, const NoiseRealization& noise,
                                                      const Field& f, const Lattice& lat,
                                                      int p);

// Bottom-up tree value on the same realization with the same quadrature grid,
// including the tree multiplicity. Summed over A(j) this reproduces the
// recursion's X_j exactly up to rounding.
Field tree_value_field(const RootedTree& t, const NoiseRealization& noise, const Field& f,
                       const Lattice& lat, int step);
double tree_value(const RootedTree& t, int step, long long site,
                  const NoiseRealization& noise, const Field& f, const Lattice& lat);

} // namespace levypw
