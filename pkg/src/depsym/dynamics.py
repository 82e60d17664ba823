"""Heisenberg evolution, reduction over R and coefficient extraction.

The reduced Heisenberg image of an S observable Q is

    Tr_R[(I ⊗ rho_R) e^{itH} (Q ⊗ I) e^{-itH}].

Writing rho_R = sum_k p_k |phi_k><phi_k|, its matrix elements are
sum_k p_k <psi_ik| Q ⊗ I |psi_jk> with psi_jk = e^{-itH}|j, phi_k>, which is
what :func:`reduce_grid` evaluates. Only the S levels asked for are
propagated, which keeps oscillator pairs at large cutoff affordable.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field

import numpy as np

from .hamiltonians import HamiltonianSpec, build
from .linalg import (DimensionError, Propagator, apply_local, as_matrix, as_operand, check_hermitian,
                     evolve_unitary, hs_distance, partial_trace)
from .model import DensityMatrix, Operator, SpaceSpec, env_state, ladder, lift, number, pauli, sigma_pm

QUBIT_COMPONENTS = ("I", "S1", "S2", "S3")
OSC_COMPONENTS = ("f", "g", "b")

_propagators: "weakref.WeakKeyDictionary[Operator, Propagator]" = weakref.WeakKeyDictionary()


def propagator(h: Operator) -> Propagator:
    prop = _propagators.get(h)
    if prop is None:
        prop = Propagator(h.matrix)
        _propagators[h] = prop
    return prop


# -- S observables ---------------------------------------------------------

def s_observable(label: str, space: SpaceSpec) -> np.ndarray:
    """Named operator on the S factor: I, S1..S3, Sp, Sm for a qubit; I, A, Adag, N, A2 for an oscillator."""
    f = space.s_factor()
    if label == "I":
        return np.eye(f.dim, dtype=complex)
    if f.kind == "qubit":
        named = {"S1": pauli(1), "S2": pauli(2), "S3": pauli(3),
                 "Sp": sigma_pm("+"), "Sm": sigma_pm("-")}
    else:
        a = ladder(f.dim)
        named = {"A": a, "Adag": a.conj().T, "N": number(f.dim), "A2": a @ a}
    if label not in named:
        raise KeyError(f"unknown observable {label!r} for a {f.kind} system")
    return named[label]


def _check_layout(h: Operator, rho_r: DensityMatrix):
    space = h.space
    if space.s_indices != (0,):
        raise DimensionError("the system S must be the single leading factor")
    if rho_r.matrix.shape != (space.r_dim, space.r_dim):
        raise DimensionError(f"rho_R shape {rho_r.matrix.shape} does not match R dimension {space.r_dim}")


# -- Heisenberg picture on the full space ------------------------------------

def heisenberg_evolve(h: Operator, q: Operator, t: float) -> Operator:
    """e^{itH} Q e^{-itH} on the full space (dense)."""
    if q.space != h.space:
        raise DimensionError("observable and Hamiltonian live on different spaces")
    u = propagator(h).unitary(t)
    return Operator(u.conj().T @ (as_operand(q) @ u), h.space)


def heisenberg_block(h: Operator, q: Operator, t: float, index) -> np.ndarray:
    """Matrix elements <i| e^{itH} Q e^{-itH} |j> for basis indices i, j in ``index``."""
    if q.space != h.space:
        raise DimensionError("observable and Hamiltonian live on different spaces")
    index = np.asarray(index)
    cols = np.zeros((h.space.dim, len(index)), dtype=complex)
    cols[index, np.arange(len(index))] = 1
    psi = propagator(h).apply(cols, t)
    return psi.conj().T @ (as_operand(q) @ psi)


def low_levels(space: SpaceSpec, max_level: int) -> np.ndarray:
    """Basis indices whose oscillator factors all sit at Fock level <= max_level."""
    grids = np.indices(space.dims).reshape(len(space.dims), -1)
    ok = np.ones(grids.shape[1], dtype=bool)
    for i, f in enumerate(space.factors):
        if f.kind == "osc":
            ok &= grids[i] <= max_level
    return np.flatnonzero(ok)


# -- reduction over R -------------------------------------------------------

def reduce_grid(h: Operator, rho_r: DensityMatrix, observables: dict, times,
                levels: int | None = None) -> dict[str, np.ndarray]:
    """Reduced Heisenberg images for several S observables over a time grid.

    Returns label -> array of shape (len(times), L, L), where L = ``levels``
    (the lowest S basis states kept) or the full S dimension.
    """
    _check_layout(h, rho_r)
    space = h.space
    ds, dr = space.s_dim, space.r_dim
    L = ds if levels is None else int(levels)
    if not 1 <= L <= ds:
        raise DimensionError(f"levels must lie in 1..{ds}, got {L}")
    qs = {}
    for label, q in observables.items():
        q = as_matrix(q)
        if q.shape != (ds, ds):
            raise DimensionError(f"observable {label!r} has shape {q.shape}, S dimension is {ds}")
        qs[label] = q
    weights, vecs = rho_r.mixture()
    K = len(weights)
    # column (j, k) is |j> ⊗ |phi_k>
    cols = np.zeros((ds, dr, L, K), dtype=complex)
    for j in range(L):
        cols[j, :, j, :] = vecs
    cols = cols.reshape(ds * dr, L * K)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    psi_t = propagator(h).apply_grid(cols, times)
    out = {label: np.zeros((len(times), L, L), dtype=complex) for label in qs}
    for n in range(len(times)):
        psi = psi_t[n]
        # (K, L, x) @ (K, x, L) summed over k with the mixture weights
        bra = psi.reshape(-1, L, K).transpose(2, 1, 0).conj()
        for label, q in qs.items():
            ket = apply_local(q, psi, space.dims, 0).reshape(-1, L, K).transpose(2, 0, 1)
            out[label][n] = np.tensordot(weights, bra @ ket, axes=1)
    return out


def reduce(h: Operator, rho_r: DensityMatrix, q_s, t: float, levels: int | None = None) -> np.ndarray:
    """Tr_R[(I ⊗ rho_R) e^{itH} (q_s ⊗ I) e^{-itH}] as a matrix on S."""
    return reduce_grid(h, rho_r, {"q": q_s}, [t], levels)["q"][0]


def reduce_via_partial_trace(h: Operator, rho_r: DensityMatrix, q_s, t: float) -> np.ndarray:
    """Same map as :func:`reduce`, evaluated literally with dense matrices (small spaces only)."""
    _check_layout(h, rho_r)
    space = h.space
    u = evolve_unitary(h.matrix, t)
    q = lift(q_s, 0, space).dense()
    rho = np.kron(np.eye(space.s_dim), rho_r.matrix)
    return partial_trace(rho @ (u.conj().T @ q @ u), space.dims, [0])


# -- coefficient extraction --------------------------------------------------

def qubit_coeffs(q) -> dict[str, complex]:
    """Components of a 2x2 operator on I, Sigma_1, Sigma_2, Sigma_3."""
    q = as_matrix(q)
    out = {"I": np.trace(q) / 2}
    for k in (1, 2, 3):
        out[f"S{k}"] = np.trace(q @ pauli(k)) / 2
    return out


def ladder_coeffs(q_red, fit_levels: int | None = None) -> tuple[complex, complex, complex, float]:
    """Least-squares fit q_red ≈ f A + g A† + b I on the lowest ``fit_levels`` Fock levels.

    Without ``fit_levels`` the top two levels of ``q_red`` are excluded, since
    truncation corrupts them first. Returns (f, g, b, residual norm on the window).
    """
    q = as_matrix(q_red)
    d = q.shape[0]
    L = d - 2 if fit_levels is None else int(fit_levels)
    if fit_levels is None and d - 1 < 4:
        raise ValueError(f"cutoff {d - 1} too small for a ladder fit (need >= 4)")
    if not 2 <= L <= d:
        raise ValueError(f"fit window {L} must lie in 2..{d}")
    a = ladder(L)
    basis = np.stack([a.ravel(), a.conj().T.ravel(), np.eye(L).ravel()], axis=1)
    target = q[:L, :L].ravel()
    sol, *_ = np.linalg.lstsq(basis, target, rcond=None)
    resid = float(np.linalg.norm(target - basis @ sol))
    return complex(sol[0]), complex(sol[1]), complex(sol[2]), resid


@dataclass
class ReducedTrajectory:
    times: np.ndarray
    observables: list[str]
    kind: str  # "qubit" or "osc"
    reduced_ops: dict[str, np.ndarray]  # label -> (T, L, L)
    coeffs: dict[str, dict[str, np.ndarray]]  # label -> component -> (T,)
    residuals: dict[str, np.ndarray] = field(default_factory=dict)
    fit_levels: int | None = None

    def coefficient(self, observable: str, component: str) -> np.ndarray:
        return self.coeffs[observable][component]

    def rows(self):
        """(t, observable, component, re, im) tuples in time order."""
        comps = QUBIT_COMPONENTS if self.kind == "qubit" else OSC_COMPONENTS
        for n, t in enumerate(self.times):
            for label in self.observables:
                for c in comps:
                    v = self.coeffs[label][c][n]
                    yield float(t), label, c, float(v.real), float(v.imag)

    def to_dict(self) -> dict:
        comps = QUBIT_COMPONENTS if self.kind == "qubit" else OSC_COMPONENTS
        d = {
            "kind": self.kind,
            "times": [float(t) for t in self.times],
            "observables": list(self.observables),
            "coeffs": {
                label: {c: [[float(v.real), float(v.imag)] for v in self.coeffs[label][c]] for c in comps}
                for label in self.observables
            },
        }
        if self.residuals:
            d["residuals"] = {k: [float(x) for x in v] for k, v in self.residuals.items()}
            d["fit_levels"] = self.fit_levels
        return d


def default_grid(spec: HamiltonianSpec, points: int = 101, t_max: float | None = None) -> np.ndarray:
    from .hamiltonians import characteristic_period

    return np.linspace(0.0, characteristic_period(spec) if t_max is None else t_max, points)


def trajectory(h: Operator, rho_r: DensityMatrix, observables, t_grid,
               fit_levels: int | None = None) -> ReducedTrajectory:
    """Reduced images and their coefficient functions over ``t_grid``.

    ``observables`` is a list of labels understood by :func:`s_observable`
    or a mapping label -> matrix.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("time grid must be a nonempty 1-d sequence")
    if np.any(np.diff(times) < 0):
        raise ValueError("time grid must be sorted")
    if not isinstance(observables, dict):
        observables = {label: s_observable(label, h.space) for label in observables}
    kind = h.space.s_factor().kind
    levels = None
    if kind == "osc":
        ds = h.space.s_dim
        fit_levels = ds - 2 if fit_levels is None else int(fit_levels)
        levels = fit_levels
    red = reduce_grid(h, rho_r, observables, times, levels)
    coeffs, residuals = {}, {}
    for label, ops in red.items():
        if kind == "qubit":
            cs = [qubit_coeffs(m) for m in ops]
            coeffs[label] = {c: np.array([x[c] for x in cs]) for c in QUBIT_COMPONENTS}
        else:
            fits = [ladder_coeffs(m, fit_levels) for m in ops]
            coeffs[label] = {c: np.array([x[i] for x in fits]) for i, c in enumerate(OSC_COMPONENTS)}
            residuals[label] = np.array([x[3] for x in fits])
    return ReducedTrajectory(times, list(observables), kind, red, coeffs, residuals,
                             fit_levels if kind == "osc" else None)


# -- closed forms -------------------------------------------------------------

ANALYTIC_SUPPORT = {
    "xyz": ("S1", "S2", "S3"),
    "beamsplitter": ("A", "Adag", "ApB", "AmB"),
    "squeezer": ("A", "Adag", "ApB", "AmB"),
    "jc_sigma3": ("S3",),
}


def analytic_evolve(family: str, params: dict, observable: str, t: float) -> Operator:
    """Closed-form e^{itH} Q e^{-itH} built from trigonometric/hyperbolic coefficients.

    The operator lives on the same truncated space as :func:`build` would use.
    For the squeezer the rates are 2ω and 2η: with c = (A+B)/√2 the
    Hamiltonian reads iω(c†² - c²), whose Heisenberg solution is
    c cosh 2ωt + c† sinh 2ωt.
    """
    if observable not in ANALYTIC_SUPPORT.get(family, ()):
        raise ValueError(f"no closed form for observable {observable!r} under family {family!r}")
    hspec = HamiltonianSpec("jaynes_cummings" if family == "jc_sigma3" else family, dict(params))
    h = build(hspec)
    space = h.space

    def L(m, i):
        return as_operand(lift(m, i, space))

    if family == "xyz":
        g = (hspec.params["gamma1"], hspec.params["gamma2"], hspec.params["gamma3"])
        k = int(observable[1])
        # cyclic (k, l, m): Σk → Σk cos γl t cos γm t + Ξk sin γl t sin γm t
        #                        - Σl Ξm cos γl t sin γm t + Σm Ξl sin γl t cos γm t
        l, m = k % 3 + 1, (k + 1) % 3 + 1
        cl, sl = math.cos(g[l - 1] * t), math.sin(g[l - 1] * t)
        cm, sm = math.cos(g[m - 1] * t), math.sin(g[m - 1] * t)
        S = lambda j: L(pauli(j), 0)  # noqa: E731
        X = lambda j: L(pauli(j), 1)  # noqa: E731
        mat = S(k) * (cl * cm) + X(k) * (sl * sm) - S(l) @ X(m) * (cl * sm) + S(m) @ X(l) * (sl * cm)
        return Operator(mat, space)
    if family == "jc_sigma3":
        u2 = evolve_unitary(h.dense(), 2 * t)
        return Operator(L(pauli(3), 0) @ u2, space)
    a = L(ladder(space.factors[0].dim), 0)
    b = L(ladder(space.factors[1].dim), 1)
    w, e = hspec.params["omega"], hspec.params["eta"]
    if family == "beamsplitter":
        pw, pe = np.exp(-1j * w * t), np.exp(-1j * e * t)
        plus = 0.5 * (pw + pe)
        minus = 0.5 * (pw - pe)
        ops = {
            "A": a * plus + b * minus,
            "Adag": a.conj().T * np.conj(plus) + b.conj().T * np.conj(minus),
            "ApB": (a + b) * pw,
            "AmB": (a - b) * pe,
        }
    else:
        cw, sw = math.cosh(2 * w * t), math.sinh(2 * w * t)
        ce, se = math.cosh(2 * e * t), math.sinh(2 * e * t)
        ad, bd = a.conj().T, b.conj().T
        ops = {
            "A": a * (0.5 * (cw + ce)) + ad * (0.5 * (sw + se)) + b * (0.5 * (cw - ce)) + bd * (0.5 * (sw - se)),
            "Adag": ad * (0.5 * (cw + ce)) + a * (0.5 * (sw + se)) + bd * (0.5 * (cw - ce)) + b * (0.5 * (sw - se)),
            "ApB": (a + b) * cw + (ad + bd) * sw,
            "AmB": (a - b) * ce + (ad - bd) * se,
        }
    return Operator(ops[observable], space)


def numeric_observable(family: str, params: dict, observable: str) -> Operator:
    """The bare full-space operator matching an :func:`analytic_evolve` label."""
    hspec = HamiltonianSpec("jaynes_cummings" if family == "jc_sigma3" else family, dict(params))
    space = build(hspec).space
    if observable.startswith("S"):
        return lift(pauli(int(observable[1])), 0, space)
    a = as_operand(lift(ladder(space.factors[0].dim), 0, space))
    b = as_operand(lift(ladder(space.factors[1].dim), 1, space))
    return Operator({"A": a, "Adag": a.conj().T, "ApB": a + b, "AmB": a - b}[observable], space)


def jc_sigma3_oracle(omega: float, n: int, times) -> tuple[np.ndarray, np.ndarray]:
    """Identity and Σ3 coefficients (d, c) of the reduced image of Σ3 for fock(n).

    |↑,n> only mixes with |↓,n+1> (coupling 2ω√(n+1)) and |↓,n> only with
    |↑,n-1> (coupling 2ω√n), so each diagonal entry of the image is a cosine
    of twice the pair's coupling times t.
    """
    t = np.asarray(times, dtype=float)
    up = np.cos(4 * omega * math.sqrt(n + 1) * t)
    down = np.cos(4 * omega * math.sqrt(n) * t)
    return 0.5 * (up - down), 0.5 * (up + down)


# -- truncation control -------------------------------------------------------

@dataclass
class LeakageReport:
    cutoff_used: int
    comparison_cutoff: int
    max_relative_shift: float

    def to_dict(self) -> dict:
        return {"cutoff_used": self.cutoff_used, "comparison_cutoff": self.comparison_cutoff,
                "max_relative_shift": self.max_relative_shift}


def coefficient_shift(a: ReducedTrajectory, b: ReducedTrajectory) -> float:
    """max |Δcoeff| / max(1, max |coeff|) over every observable, component and time."""
    num, scale = 0.0, 1.0
    for label in a.observables:
        for c, va in a.coeffs[label].items():
            vb = b.coeffs[label][c]
            num = max(num, float(np.max(np.abs(va - vb))))
            scale = max(scale, float(np.max(np.abs(va))))
    return num / scale


def leakage_check(hspec: HamiltonianSpec, env_kind: str, env_params: dict, observables, t_grid,
                  bump: int, fit_levels: int | None = None) -> LeakageReport:
    """Rerun a trajectory at cutoff + ``bump`` and report the largest coefficient shift."""
    if hspec.cutoff is None:
        raise ValueError(f"{hspec.family} has no oscillator to truncate")
    if bump < 0:
        raise ValueError("cutoff bump must be non-negative")
    h = build(hspec)
    if h.space.s_factor().kind == "osc" and fit_levels is None:
        fit_levels = h.space.s_dim - 2
    base = trajectory(h, env_state(env_kind, h.space, **env_params), observables, t_grid, fit_levels)
    if bump == 0:
        return LeakageReport(hspec.cutoff, hspec.cutoff, 0.0)
    big = build(hspec.with_cutoff(hspec.cutoff + bump))
    other = trajectory(big, env_state(env_kind, big.space, **env_params), observables, t_grid, fit_levels)
    return LeakageReport(hspec.cutoff, hspec.cutoff + bump, coefficient_shift(base, other))


def unitality_defect(h: Operator, rho_r: DensityMatrix, t: float) -> float:
    ds = h.space.s_dim
    return hs_distance(reduce(h, rho_r, np.eye(ds), t), np.eye(ds))


__all__ = [
    "ReducedTrajectory", "LeakageReport", "heisenberg_evolve", "heisenberg_block", "reduce",
    "reduce_grid", "reduce_via_partial_trace", "trajectory", "qubit_coeffs", "ladder_coeffs",
    "analytic_evolve", "numeric_observable", "leakage_check", "s_observable", "low_levels",
    "check_hermitian", "default_grid", "unitality_defect", "coefficient_shift", "jc_sigma3_oracle",
]
