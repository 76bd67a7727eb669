#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "levypw/evaluator.hpp"
#include "levypw/graphs.hpp"

#include <algorithm>
#include <cmath>

using namespace levypw;

namespace {

const LatticeConfig kSmall{1, 1.0, 4, 1.0};

CumulantSet unit_c2() {
  CumulantSet cs;
  cs.c = {0, 0, 1, 0, 0};
  return cs;
}

CumulantSet unit_c2_c4() {
  CumulantSet cs;
  cs.c = {0, 0, 1, 0, 1};
  return cs;
}

// stationary mode-sum forms of the three first-order kernels, derived
// directly from the modewise Ornstein-Uhlenbeck law; independent of the
// graph evaluators under test
Field closed_P1(const Lattice& lat) {
  std::vector<double> mode((size_t)lat.sites());
  for (long long k = 0; k < lat.sites(); ++k)
    mode[(size_t)k] = 1.0 / lat.cell_volume() / (2.0 * lat.mu2(k));
  return lat.idft_real(mode);
}

Field closed_P2(const Lattice& lat) {
  long long S = lat.sites();
  double vol = lat.cell_volume();
  std::vector<double> mode((size_t)S);
  for (long long q = 0; q < S; ++q) {
    double inner = 0;
    for (long long q1 = 0; q1 < S; ++q1)
      for (long long q2 = 0; q2 < S; ++q2) {
        long long q3 = lat.mode_add(q, lat.mode_neg(lat.mode_add(q1, q2)));
        inner += 1.0 / (2.0 * lat.mu2(q) *
                        (lat.mu2(q) + lat.mu2(q1) + lat.mu2(q2) + lat.mu2(q3)));
      }
    mode[(size_t)q] = -2.0 / (vol * vol * vol) / ((double)S * (double)S) * inner;
  }
  return lat.idft_real(mode);
}

Field closed_PT(const Lattice& lat) {
  long long S = lat.sites();
  double veq = 0;
  for (long long k = 0; k < S; ++k) veq += 1.0 / (2.0 * lat.mu2(k));
  veq /= lat.cell_volume() * (double)S;
  std::vector<double> mode((size_t)S);
  for (long long q = 0; q < S; ++q)
    mode[(size_t)q] = -6.0 * veq / lat.cell_volume() / (4.0 * lat.mu2(q) * lat.mu2(q));
  return lat.idft_real(mode);
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<SimplifiedGraph> first_order_even_graphs() {
  auto gs = prune_odd(filter_connected(enumerate_graphs(1, 2, 3, true)));
  std::vector<SimplifiedGraph> out;
  for (const auto& g : gs) out.push_back(simplify(g));
  return out;
}

SimplifiedGraph free_pair_graph() {
  auto gs = filter_connected(enumerate_graphs(0, 2, 3, true));
  REQUIRE(gs.size() == 1);
  return simplify(gs[0]);
}

} // namespace

TEST_CASE("free two-point function matches the mode sum") {
  Lattice lat(kSmall);
  QuadratureSpec quad;
  auto g = free_pair_graph();
  Field want = closed_P1(lat);
  CHECK(want[0] == doctest::Approx(7.0 / 30.0).epsilon(1e-14));

  Field mom = equilibrium_lag_field(g, unit_c2(), lat, quad, EvalMethod::Momentum);
  CHECK(max_abs_diff(mom, want) < 1e-12);

  Field qd = equilibrium_lag_field(g, unit_c2(), lat, quad, EvalMethod::Quadrature);
  CHECK(max_abs_diff(qd, want) < 1e-8);

  double v = evaluate_graph_equilibrium(g, {0, 0}, unit_c2(), kSmall, quad);
  CHECK(v == doctest::Approx(7.0 / 30.0).epsilon(1e-10));
}

TEST_CASE("melon and tadpole values match the closed forms") {
  Lattice lat(kSmall);
  QuadratureSpec quad;
  quad.nodes_per_unit = 300; // the 1e-6 bound needs a denser time grid
  Field p2 = closed_P2(lat);
  Field pt = closed_PT(lat);

  Field mom_melon(p2.size(), 0.0), mom_tad(pt.size(), 0.0);
  Field quad_melon(p2.size(), 0.0), quad_tad(pt.size(), 0.0);
  int melons = 0, tads = 0;
  for (const auto& sg : first_order_even_graphs()) {
    bool is_melon = sg.empty_leg_counts() == std::vector<int>{4};
    auto cums = unit_c2_c4();
    Field m = equilibrium_lag_field(sg, cums, lat, quad, EvalMethod::Momentum);
    Field q = equilibrium_lag_field(sg, cums, lat, quad, EvalMethod::Quadrature);
    for (size_t i = 0; i < m.size(); ++i) {
      if (is_melon) {
        mom_melon[i] += (double)sg.mult * m[i];
        quad_melon[i] += (double)sg.mult * q[i];
      } else {
        mom_tad[i] += (double)sg.mult * m[i];
        quad_tad[i] += (double)sg.mult * q[i];
      }
    }
    (is_melon ? melons : tads) += 1;
  }
  CHECK(melons == 2);
  CHECK(tads == 6);
  // series sign: kernels are minus the summed graph values
  for (double& v : mom_melon) v = -v;
  for (double& v : quad_melon) v = -v;
  for (double& v : mom_tad) v = -v;
  for (double& v : quad_tad) v = -v;

  CHECK(max_abs_diff(mom_melon, p2) < 1e-10);
  CHECK(max_abs_diff(mom_tad, pt) < 1e-10);
  CHECK(max_abs_diff(quad_melon, p2) < 1e-6);
  CHECK(max_abs_diff(quad_tad, pt) < 1e-6);
}

TEST_CASE("first-order kernel bundle agrees with the closed forms") {
  Lattice lat(kSmall);
  QuadratureSpec quad;
  auto k = first_order_kernels(lat, quad, EvalMethod::Momentum);
  CHECK(max_abs_diff(k.P1, closed_P1(lat)) < 1e-12);
  CHECK(max_abs_diff(k.P2, closed_P2(lat)) < 1e-10);
  CHECK(max_abs_diff(k.PT, closed_PT(lat)) < 1e-10);

  Field f = assemble_two_point(k, 2.0, 3.0, 0.1, true);
  for (size_t i = 0; i < f.size(); ++i)
    CHECK(f[i] == doctest::Approx(2 * k.P1[i] + 0.1 * (3 * k.P2[i] + 4 * k.PT[i]))
                      .epsilon(1e-13));
}

TEST_CASE("quadrature is stable under node doubling and halving") {
  Lattice lat(kSmall);
  auto g = free_pair_graph();
  QuadratureSpec full;
  QuadratureSpec half;
  half.nodes_per_unit = 75;
  QuadratureSpec dbl;
  dbl.nodes_per_unit = 300;

  Field vf = equilibrium_lag_field(g, unit_c2(), lat, full, EvalMethod::Quadrature);
  Field vh = equilibrium_lag_field(g, unit_c2(), lat, half, EvalMethod::Quadrature);
  CHECK(max_abs_diff(vf, vh) < 4e-8);

  auto graphs = first_order_even_graphs();
  auto melon = *std::find_if(graphs.begin(), graphs.end(), [](const SimplifiedGraph& sg) {
    return sg.empty_leg_counts() == std::vector<int>{4};
  });
  Field mf = equilibrium_lag_field(melon, unit_c2_c4(), lat, full, EvalMethod::Quadrature);
  Field md = equilibrium_lag_field(melon, unit_c2_c4(), lat, dbl, EvalMethod::Quadrature);
  CHECK(max_abs_diff(mf, md) < 1e-6);
  Field mm = equilibrium_lag_field(melon, unit_c2_c4(), lat, full, EvalMethod::Momentum);
  CHECK(max_abs_diff(mf, mm) < 1e-6);
}

TEST_CASE("equilibrium values are translation invariant") {
  Lattice lat(kSmall);
  QuadratureSpec quad;
  auto g = free_pair_graph();
  for (auto method : {EvalMethod::Momentum, EvalMethod::Quadrature}) {
    double base = evaluate_graph_equilibrium(g, {0, 1}, unit_c2(), kSmall, quad, method);
    for (long long s = 1; s < 4; ++s) {
      double shifted = evaluate_graph_equilibrium(g, {s, (s + 1) % 4}, unit_c2(), kSmall,
                                                  quad, method);
      CHECK(shifted == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("vanishing cumulants give a vanishing series") {
  CumulantSet zero;
  zero.c.assign(9, 0.0);
  QuadratureSpec quad;
  auto series = truncated_correlation_series(2, 1, zero, kSmall, quad, true, false);
  for (const auto& coeff : series.coefficient)
    for (double v : coeff) CHECK(v == 0.0);
}

TEST_CASE("evaluator rejects disconnected and initial-condition input") {
  QuadratureSpec quad;
  auto all = enumerate_graphs(0, 2, 3, true);
  bool found_disconnected = false;
  for (const auto& g : all)
    if (!is_connected(g)) {
      found_disconnected = true;
      CHECK_THROWS_AS(
          evaluate_graph_equilibrium(simplify(g), {0, 0}, unit_c2(), kSmall, quad),
          ConfigError);
    }
  CHECK(found_disconnected);

  bool found_init = false;
  for (const auto& g : filter_connected(enumerate_graphs(1, 1, 3, false)))
    if (g.has_init_leaf()) {
      found_init = true;
      CHECK_THROWS_AS(
          evaluate_graph_equilibrium(simplify(g), {0}, unit_c2(), kSmall, quad),
          ConfigError);
      break;
    }
  CHECK(found_init);
}

TEST_CASE("series coefficients carry the alternating drift sign") {
  Lattice lat(kSmall);
  QuadratureSpec quad;
  auto cums = unit_c2_c4();
  auto series = truncated_correlation_series(2, 1, cums, kSmall, quad, true, false, 3,
                                             EvalMethod::Momentum);
  CHECK(series.graph_values.size() == 2);
  CHECK(series.graph_values[1].size() == 8);
  auto k = first_order_kernels(lat, quad, EvalMethod::Momentum);
  Field want(k.P1.size());
  for (size_t i = 0; i < want.size(); ++i) want[i] = k.P2[i] + k.PT[i];
  CHECK(max_abs_diff(series.coefficient[0], k.P1) < 1e-12);
  CHECK(max_abs_diff(series.coefficient[1], want) < 1e-10);

  auto lean = truncated_correlation_series(2, 1, cums, kSmall, quad, true, true, 3,
                                           EvalMethod::Momentum);
  CHECK(lean.graph_values[1].size() == 2);
  CHECK(max_abs_diff(lean.coefficient[1], k.P2) < 1e-10);
}

TEST_CASE("one-point equilibrium mean") {
  LatticeConfig cfg{1, 1.0, 4, 1.0};
  QuadratureSpec quad;
  CumulantSet cs;
  cs.c = {0, 1, 0};
  auto gs = filter_connected(enumerate_graphs(0, 1, 3, true));
  REQUIRE(gs.size() == 1);
  auto g = simplify(gs[0]);
  double mom = evaluate_graph_equilibrium(g, {0}, cs, cfg, quad, EvalMethod::Momentum);
  CHECK(mom == doctest::Approx(1.0).epsilon(1e-12));
  double qd = evaluate_graph_equilibrium(g, {0}, cs, cfg, quad, EvalMethod::Quadrature);
  // the horizon truncates the exact value at 1 - e^{-T m^2}
  CHECK(qd == doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-8));

  auto series = truncated_correlation_series(1, 0, cs, cfg, quad, true, false);
  for (double v : series.coefficient[0])
    CHECK(v == doctest::Approx(series.coefficient[0][0]).epsilon(1e-12));
}

TEST_CASE("finite-time values relax to equilibrium") {
  Lattice lat(kSmall);
  QuadratureSpec quad;
  auto g = free_pair_graph();
  Field eq = closed_P1(lat);
  for (double t : {2.0, 6.0}) {
    Field ft = finite_t_lag_field(g, t, unit_c2(), 0.0, lat, quad);
    // exact gap: modewise e^{-2 t mu^2} / (2 mu^2)
    std::vector<double> gap((size_t)lat.sites());
    for (long long k = 0; k < lat.sites(); ++k)
      gap[(size_t)k] = std::exp(-2 * t * lat.mu2(k)) / (2.0 * lat.mu2(k)) / lat.cell_volume();
    Field want_gap = lat.idft_real(gap);
    // the finite-time value carries the quadrature error, so compare absolutely
    for (size_t i = 0; i < ft.size(); ++i)
      CHECK(std::abs((eq[i] - ft[i]) - want_gap[i]) < 1e-7);
    CHECK(max_abs_diff(ft, eq) < std::exp(-t / 2));
  }
}

TEST_CASE("initial-condition terms vanish with f and decay in time") {
  QuadratureSpec quad;
  SimplifiedGraph with_init;
  bool found = false;
  for (const auto& g : filter_connected(enumerate_graphs(1, 1, 3, false)))
    if (g.has_init_leaf() && !has_odd_block(g)) {
      with_init = simplify(g);
      found = true;
      break;
    }
  REQUIRE(found);
  double zero = evaluate_graph_finite_t(with_init, 5.0, {0}, unit_c2(), 0.0, kSmall, quad);
  CHECK(zero == 0.0);
  double late = evaluate_graph_finite_t(with_init, 20.0, {0}, unit_c2(), 1.0, kSmall, quad);
  CHECK(std::abs(late) < 1e-6);

  // a bare initial-condition chain is the heat semigroup applied to f
  auto bare = enumerate_graphs(0, 1, 3, false);
  for (const auto& g : bare)
    if (g.has_init_leaf()) {
      double v = evaluate_graph_finite_t(simplify(g), 3.0, {0}, unit_c2(), 2.0, kSmall,
                                         quad);
      CHECK(v == doctest::Approx(2.0 * std::exp(-3.0)).epsilon(1e-12));
    }
}

TEST_CASE("summed tree values reproduce the perturbative recursion") {
  LatticeConfig cfg{1, 1.0, 8, 1.0};
  Lattice lat(cfg);
  int steps = 10;
  double dt = 0.05;
  LevyParams params;
  params.sigma2 = 1.0;
  params.z = 0.5;
  params.atoms = {{1.0, 0.5}, {-1.0, 0.5}};
  auto noise = sample_noise_increments(params, cfg, dt, steps, 42);
  Field f((size_t)lat.sites());
  for (long long i = 0; i < lat.sites(); ++i)
    f[(size_t)i] = 0.3 + 0.1 * std::cos(2 * 3.14159265358979323846 * (double)i / 8.0);

  for (int p : {2, 3}) {
    auto orders = perturbative_solution(2, noise, f, lat, p);
    for (int j = 0; j <= 2; ++j) {
      Field sum((size_t)lat.sites(), 0.0);
      for (const auto& [t, mult] : enumerate_trees(j, p, true)) {
        Field tv = tree_value_field(t, noise, f, lat, steps - 1);
        for (size_t i = 0; i < sum.size(); ++i) sum[i] += tv[i];
      }
      CHECK(max_abs_diff(sum, orders[(size_t)j][(size_t)(steps - 1)]) < 1e-9);
    }
  }
}
