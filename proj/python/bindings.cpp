#include "levypw/evaluator.hpp"
#include "levypw/fitting.hpp"
#include "levypw/graphs.hpp"
#include "levypw/lattice.hpp"
#include "levypw/levy.hpp"
#include "levypw/simulator.hpp"
#include "levypw/trees.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace py = pybind11;
using namespace levypw;

namespace {

// spelled out so the shape never routes through the scalar ctor; the
// (shape, ptr) overload is not copy-safe on every pybind11 release
py::array_t<double> np(const Field& f) {
  py::array_t<double> out(std::vector<py::ssize_t>{(py::ssize_t)f.size()});
  auto view = out.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < view.shape(0); ++i) view(i) = f[(size_t)i];
  return out;
}

EvalMethod parse_method(const std::string& s) {
  if (s == "auto") return EvalMethod::Auto;
  if (s == "quadrature") return EvalMethod::Quadrature;
  if (s == "momentum") return EvalMethod::Momentum;
  throw ConfigError("method must be auto, quadrature, or momentum, got '" + s + "'");
}

CumulantSet make_cumulants(const std::vector<double>& c_from_1) {
  CumulantSet cums;
  cums.c.assign(1, 0.0);
  cums.c.insert(cums.c.end(), c_from_1.begin(), c_from_1.end());
  if (cums.max_order() < 2) throw ConfigError("cumulants need at least [c1, c2]");
  return cums;
}

py::dict fit_dict(const FitResult& r) {
  py::dict d;
  d["c2"] = r.c2;
  d["c4"] = r.c4;
  d["kurtosis"] = r.kurtosis;
  d["q"] = r.q;
  d["grad_c2"] = r.grad_c2;
  d["grad_c4"] = r.grad_c4;
  d["c2_nonpositive"] = r.c2_nonpositive;
  return d;
}

py::dict graph_dict(const PWGraph& g) {
  py::dict d;
  d["id"] = g.encode();
  py::list ts;
  for (const auto& t : g.trees) ts.append(encode(t));
  d["trees"] = std::move(ts);
  d["blocks"] = g.blocks;
  d["order"] = g.order();
  d["multiplicity"] = g.tree_multiplicity();
  d["connected"] = is_connected(g);
  d["tadpole"] = is_tadpole(g);
  d["init_leaves"] = g.has_init_leaf();
  return d;
}

} // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Perturbative correlation functions of a lattice SPDE driven by Levy "
              "noise: tree and graph enumeration, graph evaluation, direct "
              "simulation, and noise-law identification.";

  py::register_exception<ConfigError>(mod, "ConfigurationError", PyExc_ValueError);
  py::register_exception<NumericError>(mod, "NumericFailure", PyExc_ArithmeticError);

  py::class_<LatticeConfig>(mod, "LatticeConfig")
      .def(py::init([](int d, double delta, int L, double m) {
             LatticeConfig cfg{d, delta, L, m};
             cfg.validate();
             return cfg;
           }),
           py::arg("d") = 1, py::arg("delta") = 1.0, py::arg("L") = 2,
           py::arg("m") = 1.0)
      .def_readwrite("d", &LatticeConfig::d)
      .def_readwrite("delta", &LatticeConfig::delta)
      .def_readwrite("L", &LatticeConfig::L)
      .def_readwrite("m", &LatticeConfig::m)
      .def("sites", &LatticeConfig::sites)
      .def("cell_volume", &LatticeConfig::cell_volume)
      .def("__repr__", [](const LatticeConfig& c) {
        return "LatticeConfig(d=" + std::to_string(c.d) +
               ", delta=" + std::to_string(c.delta) + ", L=" + std::to_string(c.L) +
               ", m=" + std::to_string(c.m) + ")";
      });

  py::class_<Lattice>(mod, "Lattice")
      .def(py::init<LatticeConfig>(), py::arg("config"))
      .def(py::init([](int d, double delta, int L, double m) {
             return Lattice(LatticeConfig{d, delta, L, m});
           }),
           py::arg("d") = 1, py::arg("delta") = 1.0, py::arg("L") = 2,
           py::arg("m") = 1.0)
      .def_property_readonly("config", &Lattice::config,
                             py::return_value_policy::copy)
      .def_property_readonly("sites", &Lattice::sites)
      .def_property_readonly("cell_volume", &Lattice::cell_volume)
      .def("mu2", &Lattice::mu2, py::arg("mode"))
      .def("mu2_table", [](const Lattice& l) { return np(l.mu2_table()); })
      .def("index", &Lattice::index, py::arg("x"))
      .def("coords", &Lattice::coords, py::arg("i"))
      .def("min_image_norm2", &Lattice::min_image_norm2, py::arg("site"))
      .def("heat_kernel",
           [](const Lattice& l, double t) { return np(heat_kernel(l, t)); },
           py::arg("t"))
      .def("green", [](const Lattice& l, double t) { return np(green(l, t)); },
           py::arg("t"))
      .def("convolve",
           [](const Lattice& l, const Field& f, const Field& g) {
             return np(convolve(l, f, g));
           },
           py::arg("f"), py::arg("g"))
      .def("field_sum",
           [](const Lattice& l, const Field& f) { return field_sum(l, f); },
           py::arg("f"));

  py::class_<LevyParams>(mod, "LevyParams")
      .def(py::init([](double a, double sigma2, double z,
                       std::vector<std::pair<double, double>> atoms) {
             LevyParams p;
             p.a = a;
             p.sigma2 = sigma2;
             p.z = z;
             p.atoms = std::move(atoms);
             p.validate();
             return p;
           }),
           py::arg("a") = 0.0, py::arg("sigma2") = 0.0, py::arg("z") = 0.0,
           py::arg("atoms") = std::vector<std::pair<double, double>>{})
      .def_readwrite("a", &LevyParams::a)
      .def_readwrite("sigma2", &LevyParams::sigma2)
      .def_readwrite("z", &LevyParams::z)
      .def_readwrite("atoms", &LevyParams::atoms)
      .def("cumulant", [](const LevyParams& p, int n) { return cumulant(n, p); },
           py::arg("n"))
      .def("symmetric_jumps", &LevyParams::symmetric_jumps);

  mod.def("scale_jumps", &scale_jumps, py::arg("params"), py::arg("factor"));

  py::class_<SimConfig>(mod, "SimConfig")
      .def(py::init([](double dt, long long burn_in, long long samples,
                       long long thinning, uint64_t seed, double lam, int p,
                       double blowup_threshold) {
             SimConfig s;
             s.dt = dt;
             s.burn_in = burn_in;
             s.samples = samples;
             s.thinning = thinning;
             s.seed = seed;
             s.lambda = lam;
             s.p = p;
             s.blowup_threshold = blowup_threshold;
             return s;
           }),
           py::arg("dt") = 0.05, py::arg("burn_in") = 0, py::arg("samples") = 1,
           py::arg("thinning") = 1, py::arg("seed") = 1, py::arg("lam") = 0.0,
           py::arg("p") = 3, py::arg("blowup_threshold") = 1e12)
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("burn_in", &SimConfig::burn_in)
      .def_readwrite("samples", &SimConfig::samples)
      .def_readwrite("thinning", &SimConfig::thinning)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("lam", &SimConfig::lambda)
      .def_readwrite("p", &SimConfig::p)
      .def_readwrite("blowup_threshold", &SimConfig::blowup_threshold);

  mod.def(
      "trees",
      [](int order, int p, bool init_leaves) {
        py::list out;
        for (const auto& [t, mult] : enumerate_trees(order, p, init_leaves)) {
          py::dict d;
          d["encoding"] = encode(t);
          d["multiplicity"] = mult;
          d["order"] = tree_order(t);
          d["noise_leaves"] = count_leaves(t, TreeNode::Kind::NoiseLeaf);
          d["init_leaves"] = count_leaves(t, TreeNode::Kind::InitLeaf);
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("order"), py::arg("p") = 3, py::arg("init_leaves") = true);

  mod.def(
      "graphs",
      [](int order, int n, int p, bool equilibrium, bool connected_only,
         bool drop_odd, bool drop_tadpoles) {
        auto gs = enumerate_graphs(order, n, p, equilibrium);
        if (connected_only) gs = filter_connected(gs);
        if (drop_odd) gs = prune_odd(gs);
        if (drop_tadpoles)
          gs.erase(std::remove_if(gs.begin(), gs.end(), is_tadpole), gs.end());
        py::list out;
        for (const auto& g : gs) out.append(graph_dict(g));
        return out;
      },
      py::arg("order"), py::arg("n"), py::arg("p") = 3,
      py::arg("equilibrium") = true, py::arg("connected_only") = false,
      py::arg("drop_odd") = false, py::arg("drop_tadpoles") = false);

  mod.def(
      "correlation_series",
      [](int n, int order, const std::vector<double>& cumulants,
         const LatticeConfig& lattice, bool equilibrium, bool drop_tadpoles, int p,
         const std::string& method, bool even_only, double t, double f0, int threads,
         double t_max, int nodes_per_unit) {
        QuadratureSpec quad{t_max, nodes_per_unit};
        auto res = truncated_correlation_series(
            n, order, make_cumulants(cumulants), lattice, quad, equilibrium,
            drop_tadpoles, p, parse_method(method), even_only, t, f0, threads);
        py::dict out;
        py::list coeff, graphs;
        for (const auto& f : res.coefficient) coeff.append(np(f));
        for (const auto& per_order : res.graph_values) {
          py::list row;
          for (const auto& [id, f] : per_order) row.append(py::make_tuple(id, np(f)));
          graphs.append(std::move(row));
        }
        out["n"] = res.n;
        out["coefficient"] = std::move(coeff);
        out["graphs"] = std::move(graphs);
        return out;
      },
      py::arg("n"), py::arg("order"), py::arg("cumulants"), py::arg("lattice"),
      py::arg("equilibrium") = true, py::arg("drop_tadpoles") = false,
      py::arg("p") = 3, py::arg("method") = "auto", py::arg("even_only") = false,
      py::arg("t") = 0.0, py::arg("f0") = 0.0, py::arg("threads") = 0,
      py::arg("t_max") = 0.0, py::arg("nodes_per_unit") = 150);

  mod.def(
      "first_order_kernels",
      [](const Lattice& lat, const std::string& method, int p, double t_max,
         int nodes_per_unit) {
        auto k = first_order_kernels(lat, QuadratureSpec{t_max, nodes_per_unit},
                                     parse_method(method), p);
        py::dict d;
        d["P1"] = np(k.P1);
        d["P2"] = np(k.P2);
        d["PT"] = np(k.PT);
        return d;
      },
      py::arg("lattice"), py::arg("method") = "auto", py::arg("p") = 3,
      py::arg("t_max") = 0.0, py::arg("nodes_per_unit") = 150);

  mod.def(
      "discretization_matched_kernels",
      [](const Lattice& lat, double dt) {
        auto k = discretization_matched_kernels(lat, dt);
        py::dict d;
        d["P1"] = np(k.P1);
        d["P2"] = np(k.P2);
        d["PT"] = np(k.PT);
        return d;
      },
      py::arg("lattice"), py::arg("dt"));

  mod.def(
      "simulate_correlation",
      [](const LevyParams& noise, const SimConfig& sim, const LatticeConfig& lattice,
         int max_lag, int batches, const Field& f) {
        auto traj = simulate(noise, sim, lattice, f);
        auto cf =
            estimate_correlation(traj, max_lag < 0 ? lattice.L : max_lag, batches);
        py::dict d;
        d["mean"] = np(cf.mean);
        d["se"] = np(cf.se);
        d["batches"] = cf.batches;
        d["max_lag"] = cf.max_lag;
        d["steps_run"] = traj.steps_run;
        return d;
      },
      py::arg("noise"), py::arg("sim"), py::arg("lattice"), py::arg("max_lag") = -1,
      py::arg("batches") = 20, py::arg("f") = Field{});

  mod.def(
      "estimate_increment_cumulants",
      [](const LevyParams& noise, const LatticeConfig& lattice, double dt,
         long long count, int batches, uint64_t seed) {
        py::list out;
        for (const auto& e :
             estimate_increment_cumulants(noise, lattice, dt, count, batches, seed)) {
          py::dict d;
          d["value"] = e.value;
          d["se"] = e.se;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("noise"), py::arg("lattice"), py::arg("dt"), py::arg("count"),
      py::arg("batches") = 20, py::arg("seed") = 1);

  mod.def(
      "fit_first_order",
      [](const Field& F, const Field& P1, const Field& P2, double lam,
         const Lattice& lat) { return fit_dict(fit_first_order(F, P1, P2, lam, lat)); },
      py::arg("F"), py::arg("P1"), py::arg("P2"), py::arg("lam"), py::arg("lattice"));

  mod.def("classify_kurtosis", &classify_kurtosis, py::arg("K"),
          py::arg("k_zero") = 0.05, py::arg("k_jump") = 1.0);

  mod.def(
      "identify_noise",
      [](const LevyParams& noise, const LatticeConfig& lattice, const SimConfig& sim,
         int batches, int refit_rounds, double k_zero, double k_jump) {
        PipelineConfig cfg;
        cfg.lattice = lattice;
        cfg.noise = noise;
        cfg.sim = sim;
        cfg.batches = batches;
        cfg.refit_rounds = refit_rounds;
        cfg.k_zero = k_zero;
        cfg.k_jump = k_jump;
        auto res = identify_noise(cfg);
        py::dict d;
        d["c2"] = res.c2;
        d["c2_se"] = res.c2_se;
        d["c4"] = res.c4;
        d["c4_se"] = res.c4_se;
        d["kurtosis"] = res.kurtosis;
        d["kurtosis_se"] = res.kurtosis_se;
        d["label"] = res.label;
        d["batches"] = res.batches;
        d["c2_clamped"] = res.c2_clamped;
        d["corrected"] = np(res.corrected);
        d["fit"] = fit_dict(res.fit);
        return d;
      },
      py::arg("noise"), py::arg("lattice"), py::arg("sim"), py::arg("batches") = 25,
      py::arg("refit_rounds") = 3, py::arg("k_zero") = 0.05, py::arg("k_jump") = 1.0);
}
