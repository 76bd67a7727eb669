import math

import pytest

import levypw


def test_tree_table():
    ts = levypw.trees(1, p=3)
    assert len(ts) == 4
    assert sorted(t["multiplicity"] for t in ts) == [1, 1, 3, 3]
    assert len(levypw.trees(0, p=5)) == 2
    assert len(levypw.trees(0, p=5, init_leaves=False)) == 1


def test_lattice_modes_and_kernel():
    lat = levypw.Lattice(L=4, m=1.0)
    assert lat.sites == 4
    assert list(lat.mu2_table()) == pytest.approx([1.0, 3.0, 5.0, 3.0], abs=1e-12)
    # heat kernel integrates to e^{-t m^2}
    g = lat.heat_kernel(0.3)
    assert lat.field_sum(g) == pytest.approx(math.exp(-0.3), rel=1e-12)


def test_graph_census():
    all_graphs = levypw.graphs(1, 2, equilibrium=True)
    connected = levypw.graphs(1, 2, equilibrium=True, connected_only=True)
    even = levypw.graphs(1, 2, equilibrium=True, connected_only=True, drop_odd=True)
    assert (len(all_graphs), len(connected), len(even)) == (30, 20, 8)
    assert all(g["connected"] for g in connected)


def test_free_propagator_closed_form():
    lat = levypw.Lattice(L=4, m=1.0)
    k = levypw.first_order_kernels(lat, method="momentum")
    assert k["P1"][0] == pytest.approx(7.0 / 30.0, abs=1e-12)


def test_series_order_zero_matches_kernel():
    cfg = levypw.LatticeConfig(L=4)
    res = levypw.correlation_series(2, 0, [0.0, 1.0], cfg, method="momentum")
    lat = levypw.Lattice(cfg)
    k = levypw.first_order_kernels(lat, method="momentum")
    assert res["coefficient"][0] == pytest.approx(list(k["P1"]), abs=1e-12)


def test_fit_recovers_synthetic_model():
    lat = levypw.Lattice(L=8, m=1.0)
    k = levypw.first_order_kernels(lat, method="momentum")
    lam = 0.1
    F = [2.0 * p1 + 5.0 * lam * p2 for p1, p2 in zip(k["P1"], k["P2"])]
    fit = levypw.fit_first_order(F, k["P1"], k["P2"], lam, lat)
    assert fit["c2"] == pytest.approx(2.0, abs=1e-9)
    assert fit["c4"] == pytest.approx(5.0, abs=1e-7)
    assert levypw.classify_kurtosis(fit["kurtosis"]) == "jump-dominated"


def test_simulation_matches_linear_law():
    noise = levypw.LevyParams(sigma2=1.0)
    sim = levypw.SimConfig(dt=0.05, burn_in=500, samples=2000, thinning=5, seed=7)
    cfg = levypw.LatticeConfig(L=8)
    out = levypw.simulate_correlation(noise, sim, cfg)
    assert len(out["mean"]) == 8
    # lag 0 of the lambda = 0 chain sits at the discrete stationary variance,
    # which is the zeroth-order kernel at lag 0
    lat = levypw.Lattice(cfg)
    want = levypw.discretization_matched_kernels(lat, sim.dt)["P1"][0]
    assert out["mean"][0] == pytest.approx(want, abs=6 * out["se"][0])


def test_identification_round_trip():
    noise = levypw.LevyParams(sigma2=1.0)
    sim = levypw.SimConfig(
        dt=0.05, burn_in=1000, samples=2500, thinning=10, seed=21, lam=0.1
    )
    res = levypw.identify_noise(noise, levypw.LatticeConfig(L=16), sim, batches=10)
    assert res["c2"] == pytest.approx(1.0, abs=6 * res["c2_se"])
    assert res["c2_se"] > 0
    assert len(res["corrected"]) == 16


def test_config_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        levypw.Lattice(L=0)
    with pytest.raises(ValueError):
        levypw.LevyParams(z=1.0, atoms=[(1.0, 0.7)])  # weights must sum to 1
    with pytest.raises(ValueError):
        levypw.classify_kurtosis(0.3, k_zero=0.5, k_jump=0.1)
