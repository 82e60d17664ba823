import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depsym.dynamics import (analytic_evolve, default_grid, heisenberg_block, heisenberg_evolve,
                             jc_sigma3_oracle, ladder_coeffs, leakage_check, low_levels, numeric_observable,
                             qubit_coeffs, reduce, reduce_grid, reduce_via_partial_trace, s_observable,
                             trajectory, unitality_defect)
from depsym.hamiltonians import HamiltonianSpec, build
from depsym.linalg import DimensionError, hs_distance
from depsym.model import Operator, bipartite, env_state, ladder, lift, osc, pauli, qubit
from oracle import I2, X, Y, Z, heisenberg, lower, reduce_bipartite, xyz


def xyz_case(g=(1.0, 1.0, 1.0), **env):
    h = build(HamiltonianSpec.of("xyz", *g))
    kind = env.pop("kind", "maximally_mixed")
    return h, env_state(kind, h.space, **env)


def test_heisenberg_evolve_examples():
    h = build(HamiltonianSpec.of("xyz", 0.4, 1.2, -0.7))
    q = lift(X, 0, h.space)
    assert hs_distance(heisenberg_evolve(h, q, 0.0), q) < 1e-15
    assert hs_distance(heisenberg_evolve(h, q, 1.3), heisenberg(xyz(0.4, 1.2, -0.7), np.kron(X, I2), 1.3)) < 1e-12
    with pytest.raises(DimensionError):
        heisenberg_evolve(h, Operator(np.eye(8), bipartite(qubit("S"), qubit("R"), qubit("R2"))), 1.0)


def test_jc_sigma3_closed_form():
    spec = HamiltonianSpec.of("jaynes_cummings", 0.9, 10)
    h = build(spec)
    for t in (0.3, 1.7):
        num = heisenberg_evolve(h, lift(Z, 0, h.space), t)
        assert hs_distance(num, analytic_evolve("jc_sigma3", spec.params, "S3", t)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0, 5))
def test_reduce_matches_literal_partial_trace(seed, t):
    rng = np.random.default_rng(seed)
    g = rng.uniform(-3, 3, size=3)
    r = rng.normal(size=3)
    r *= rng.uniform(0, 1) / np.linalg.norm(r)
    h, rho = xyz_case(tuple(g), kind="bloch", r=list(r))
    q = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    ref = reduce_bipartite(xyz(*g), rho.matrix, q, t)
    assert hs_distance(reduce(h, rho, q, t), ref) < 1e-12
    assert hs_distance(reduce_via_partial_trace(h, rho, q, t), ref) < 1e-12


def test_reduce_multi_factor_environment():
    h = build(HamiltonianSpec.of("spin_star", 0.7, 2))
    rho = env_state("bloch", h.space, r=[0.2, -0.1, 0.6])
    for q in (X, Y, Z):
        assert hs_distance(reduce(h, rho, q, 0.9), reduce_via_partial_trace(h, rho, q, 0.9)) < 1e-12


def test_reduce_isotropic_maximally_mixed():
    h, rho = xyz_case((0.8, 0.8, 0.8))
    for t in (0.2, 1.1, 2.9):
        assert hs_distance(reduce(h, rho, Z, t), Z * math.cos(0.8 * t) ** 2) < 1e-12


@pytest.mark.parametrize("n", [0, 1, 3])
def test_beamsplitter_reduction_of_a(n):
    w, e = 1.0, 0.6
    h = build(HamiltonianSpec.of("beamsplitter", w, e, 30))
    rho = env_state("fock", h.space, n=n)
    for t in (0.4, 2.5):
        red = reduce(h, rho, ladder(31), t, levels=20)
        assert hs_distance(red, ladder(31)[:20, :20] * 0.5 * (np.exp(-1j * w * t) + np.exp(-1j * e * t))) < 1e-12


def test_unitality_and_hermiticity_examples():
    for spec, kind, kw in [(HamiltonianSpec.of("xyz", 1, 2, 3), "bloch", {"r": [0.1, 0.5, 0.2]}),
                           (HamiltonianSpec.of("jaynes_cummings", 1.0, 12), "fock", {"n": 2}),
                           (HamiltonianSpec.of("squeezer", 1.0, 0.4, 12), "fock", {"n": 0})]:
        h = build(spec)
        rho = env_state(kind, h.space, **kw)
        assert unitality_defect(h, rho, 0.37) < 1e-11
        q = s_observable("S1" if h.space.s_factor().kind == "qubit" else "N", h.space)
        red = reduce(h, rho, q, 0.37)
        assert np.abs(red - red.conj().T).max() < 1e-11


def test_reduce_rejects_bad_shapes():
    h, rho = xyz_case()
    with pytest.raises(DimensionError):
        reduce(h, rho, np.eye(3), 1.0)
    with pytest.raises(DimensionError):
        reduce(h, rho, Z, 1.0, levels=3)


def test_trajectory_at_zero_and_reconstruction():
    h, rho = xyz_case((1.0, 2.0, 0.5), kind="bloch", r=[0.3, 0.1, -0.2])
    tr = trajectory(h, rho, ["S1", "S2", "S3"], [0.0])
    assert [tr.coeffs["S1"][c][0] for c in ("I", "S1", "S2", "S3")] == pytest.approx([0, 1, 0, 0], abs=1e-15)
    tr = trajectory(h, rho, ["S1", "S2", "S3"], default_grid(HamiltonianSpec.of("xyz", 1.0, 2.0, 0.5)))
    for label, ops in tr.reduced_ops.items():
        c = tr.coeffs[label]
        rebuilt = (np.multiply.outer(c["I"], I2) + np.multiply.outer(c["S1"], X)
                   + np.multiply.outer(c["S2"], Y) + np.multiply.outer(c["S3"], Z))
        assert np.abs(ops - rebuilt).max() < 1e-12
    assert hs_distance(tr.reduced_ops["S2"][0], Y) < 1e-12


def test_trajectory_isotropic_coefficients():
    g = 1.3
    h, rho = xyz_case((g, g, g))
    times = np.linspace(0, 3, 11)
    tr = trajectory(h, rho, ["S1"], times)
    assert np.allclose(tr.coeffs["S1"]["S1"], np.cos(g * times) ** 2, atol=1e-12)
    for c in ("I", "S2", "S3"):
        assert np.abs(tr.coeffs["S1"][c]).max() < 1e-12


def test_trajectory_rejects_bad_grids():
    h, rho = xyz_case()
    with pytest.raises(ValueError):
        trajectory(h, rho, ["S1"], [])
    with pytest.raises(ValueError):
        trajectory(h, rho, ["S1"], [1.0, 0.5])


@pytest.mark.parametrize("n", [0, 1, 2])
def test_jc_two_level_oracle(n):
    h = build(HamiltonianSpec.of("jaynes_cummings", 1.0, 30))
    times = np.linspace(0, 2 * math.pi, 41)
    tr = trajectory(h, env_state("fock", h.space, n=n), ["S1", "S2", "S3"], times)
    d, c = jc_sigma3_oracle(1.0, n, times)
    assert np.abs(tr.coeffs["S3"]["S3"] - c).max() < 1e-12
    assert np.abs(tr.coeffs["S3"]["I"] - d).max() < 1e-12
    if n == 0:
        assert np.allclose(c, (1 + np.cos(4 * times)) / 2) and np.allclose(d, (np.cos(4 * times) - 1) / 2)
    # a, b of the Σ1 image reappear in the Σ2 image (Σ2 -> Σ2 a + Σ1 (-b))
    assert np.abs(tr.coeffs["S1"]["S1"] - tr.coeffs["S2"]["S2"]).max() < 1e-12
    assert np.abs(tr.coeffs["S1"]["S2"] + tr.coeffs["S2"]["S1"]).max() < 1e-12


def test_qubit_coeffs():
    c = qubit_coeffs(0.5 * I2 + 0.25 * X - 2 * Y + 1j * Z)
    assert c == pytest.approx({"I": 0.5, "S1": 0.25, "S2": -2, "S3": 1j})


def test_ladder_coeffs():
    a = ladder(12)
    assert ladder_coeffs(a) == pytest.approx((1, 0, 0, 0), abs=1e-15)
    f, g, b, res = ladder_coeffs(0.3j * a + (1 - 2j) * a.conj().T + 0.7 * np.eye(12))
    assert (f, g, b) == pytest.approx((0.3j, 1 - 2j, 0.7)) and res < 1e-14
    f, g, b, res = ladder_coeffs(a @ a, fit_levels=6)
    assert res > 1
    with pytest.raises(ValueError):
        ladder_coeffs(ladder(4))
    with pytest.raises(ValueError):
        ladder_coeffs(a, fit_levels=1)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_xyz_numeric_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    params = dict(zip(("gamma1", "gamma2", "gamma3"), rng.uniform(-3, 3, 3)))
    h = build(HamiltonianSpec("xyz", params))
    t = rng.uniform(0, 5)
    for obs in ("S1", "S2", "S3"):
        num = heisenberg_evolve(h, numeric_observable("xyz", params, obs), t)
        assert hs_distance(num, analytic_evolve("xyz", params, obs, t)) < 1e-9


def test_xyz_sigma2_term_structure():
    g1, g2, g3, t = 0.7, -1.4, 2.2, 0.9
    ref = (np.kron(Y, I2) * math.cos(g3 * t) * math.cos(g1 * t) + np.kron(I2, Y) * math.sin(g3 * t) * math.sin(g1 * t)
           - np.kron(Z, X) * math.cos(g3 * t) * math.sin(g1 * t) + np.kron(X, Z) * math.sin(g3 * t) * math.cos(g1 * t))
    got = analytic_evolve("xyz", {"gamma1": g1, "gamma2": g2, "gamma3": g3}, "S2", t)
    assert np.linalg.norm(got.dense() - ref) < 1e-14


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_beamsplitter_numeric_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    params = {"omega": rng.uniform(-2, 2), "eta": rng.uniform(-2, 2), "cutoff": 12}
    h = build(HamiltonianSpec("beamsplitter", params))
    t = rng.uniform(0, 5)
    # truncation is exact on total-number sectors below the cutoff
    tot = np.add.outer(np.arange(13), np.arange(13)).ravel()
    idx = np.flatnonzero(tot <= 11)
    for obs in ("A", "Adag", "ApB", "AmB"):
        num = heisenberg_evolve(h, numeric_observable("beamsplitter", params, obs), t).dense()[np.ix_(idx, idx)]
        ref = analytic_evolve("beamsplitter", params, obs, t).dense()[np.ix_(idx, idx)]
        assert np.linalg.norm(num - ref) < 1e-9


def test_squeezer_numeric_matches_closed_form_on_low_block():
    # heavy tails at |2ωt| = 1: the truncated ladder needs cutoff 90 for 1e-9 on levels <= 3
    rng = np.random.default_rng(7)
    for _ in range(5):
        params = {"omega": rng.uniform(-1, 1), "eta": rng.uniform(-1, 1), "cutoff": 90}
        t = 0.5 / max(abs(params["omega"]), abs(params["eta"]))
        h = build(HamiltonianSpec("squeezer", params))
        idx = low_levels(h.space, 3)
        for obs in ("A", "ApB"):
            num = heisenberg_block(h, numeric_observable("squeezer", params, obs), t, idx)
            ref = analytic_evolve("squeezer", params, obs, t).matrix[idx][:, idx].toarray()
            assert np.linalg.norm(num - ref) < 1e-9


def test_analytic_at_zero_and_rejections():
    for fam, params, obs in [("xyz", {"gamma1": 1, "gamma2": 2, "gamma3": 3}, "S3"),
                             ("beamsplitter", {"omega": 1, "eta": 0.5, "cutoff": 6}, "ApB"),
                             ("squeezer", {"omega": 1, "eta": 0.5, "cutoff": 6}, "Adag")]:
        assert hs_distance(analytic_evolve(fam, params, obs, 0.0), numeric_observable(fam, params, obs)) < 1e-14
    bs = {"omega": 1.1, "eta": 0.5, "cutoff": 6}
    got = analytic_evolve("beamsplitter", bs, "ApB", 0.8)
    assert hs_distance(got, numeric_observable("beamsplitter", bs, "ApB") * np.exp(-1.1j * 0.8)) < 1e-14
    with pytest.raises(ValueError):
        analytic_evolve("xyz", {"gamma1": 1, "gamma2": 2, "gamma3": 3}, "A", 1.0)
    with pytest.raises(ValueError):
        analytic_evolve("tilted", {"alpha": 1, "gamma": 2}, "S1", 1.0)


def test_leakage_examples():
    grid = np.linspace(0, 2 * math.pi, 21)
    bs = HamiltonianSpec.of("beamsplitter", 1.0, 0.6, 20)
    assert leakage_check(bs, "fock", {"n": 0}, ["A"], grid, 4).max_relative_shift < 1e-9
    assert leakage_check(bs, "fock", {"n": 0}, ["A"], grid, 0).max_relative_shift == 0
    sq = HamiltonianSpec.of("squeezer", 1.0, 0.6, 60)
    rep = leakage_check(sq, "fock", {"n": 0}, ["A"], np.linspace(0, 0.5, 11), 10, fit_levels=4)
    assert rep.cutoff_used == 60 and rep.comparison_cutoff == 70
    assert rep.max_relative_shift < 1e-6
    with pytest.raises(ValueError):
        leakage_check(HamiltonianSpec.of("xyz", 1, 1, 1), "maximally_mixed", {}, ["S1"], grid, 2)


def test_squeezer_window_too_wide_is_visible_in_leakage():
    sq = HamiltonianSpec.of("squeezer", 1.0, 0.6, 30)
    rep = leakage_check(sq, "fock", {"n": 0}, ["A"], np.linspace(0, 0.5, 6), 10, fit_levels=25)
    assert rep.max_relative_shift > 1e-6


def test_rows_and_serialization():
    h, rho = xyz_case()
    tr = trajectory(h, rho, ["S1"], [0.0, 0.5])
    rows = list(tr.rows())
    assert len(rows) == 2 * 4 and rows[0][:3] == (0.0, "S1", "I")
    d = tr.to_dict()
    assert d["kind"] == "qubit" and len(d["coeffs"]["S1"]["S1"]) == 2
