"""Composite-system bookkeeping: factor layout, canonical operators, states."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .linalg import SPARSE_OPERATOR_DIM, DimensionError, as_matrix, as_operand, hermiticity_defect, kron_all

STATE_TOL = 1e-10

_PAULI = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class Factor:
    label: str
    dim: int
    kind: str = "qubit"  # "qubit" or "osc"


@dataclass(frozen=True)
class SpaceSpec:
    """Ordered tensor factors with an S/R split (S factors first by convention)."""

    factors: tuple[Factor, ...]
    s_indices: tuple[int, ...]
    r_indices: tuple[int, ...]

    def __post_init__(self):
        n = len(self.factors)
        both = sorted(self.s_indices + self.r_indices)
        if both != list(range(n)):
            raise ValueError(f"s_indices {self.s_indices} and r_indices {self.r_indices} "
                             f"do not partition {n} factors")
        for f in self.factors:
            if f.dim < 2:
                raise ValueError(f"factor {f.label!r} has dimension {f.dim} < 2")

    @property
    def dims(self) -> list[int]:
        return [f.dim for f in self.factors]

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def s_dim(self) -> int:
        return int(np.prod([self.factors[i].dim for i in self.s_indices]))

    @property
    def r_dim(self) -> int:
        return int(np.prod([self.factors[i].dim for i in self.r_indices]))

    def r_space(self) -> "SpaceSpec":
        fs = tuple(self.factors[i] for i in self.r_indices)
        return SpaceSpec(fs, (), tuple(range(len(fs))))

    def s_factor(self) -> Factor:
        return self.factors[self.s_indices[0]]

    def index(self, label: str) -> int:
        for i, f in enumerate(self.factors):
            if f.label == label:
                return i
        raise KeyError(label)


def qubit(label: str) -> Factor:
    return Factor(label, 2, "qubit")


def osc(label: str, cutoff: int) -> Factor:
    """Oscillator truncated to Fock levels 0..cutoff."""
    return Factor(label, cutoff + 1, "osc")


def bipartite(s: Factor, *r: Factor) -> SpaceSpec:
    return SpaceSpec((s,) + tuple(r), (0,), tuple(range(1, len(r) + 1)))


@dataclass(frozen=True, eq=False)
class Operator:
    """Matrix on the full space of ``space``.

    Large oscillator spaces keep a CSR matrix instead of a dense array.
    """

    matrix: np.ndarray | sp.csr_matrix
    space: SpaceSpec

    def __post_init__(self):
        m = as_operand(self.matrix)
        if m.shape != (self.space.dim, self.space.dim):
            raise DimensionError(f"matrix shape {m.shape} does not match space dimension {self.space.dim}")
        if isinstance(m, np.ndarray):
            m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return as_matrix(self.matrix)

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.space)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix @ as_operand(other), self.space)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix + as_operand(other), self.space)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix - as_operand(other), self.space)

    def __mul__(self, c) -> "Operator":
        return Operator(self.matrix * c, self.space)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    op: Operator
    tol: float = field(default=STATE_TOL, repr=False)

    def __post_init__(self):
        m = self.op.matrix
        if hermiticity_defect(m) > self.tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > self.tol:
            raise ValueError(f"density matrix trace {np.trace(m).real:.12g} != 1")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -self.tol:
            raise ValueError("density matrix has a negative eigenvalue")

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def space(self) -> SpaceSpec:
        return self.op.space

    def expect(self, q) -> complex:
        return complex(np.trace(self.matrix @ as_matrix(q)))

    def mixture(self, cutoff: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
        """Weights and eigenvectors (columns) of the nonzero spectral part."""
        m = self.matrix
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
        keep = w > cutoff
        return w[keep], v[:, keep]


def pauli(k: int) -> np.ndarray:
    if k not in _PAULI:
        raise ValueError(f"Pauli index must be 1, 2 or 3, got {k!r}")
    return _PAULI[k].copy()


def sigma_pm(sign: int | str) -> np.ndarray:
    """Sigma_1 ± i Sigma_2 (twice the elementary raising/lowering matrix)."""
    s = {"+": 1, "-": -1, 1: 1, -1: -1}.get(sign)
    if s is None:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return pauli(1) + s * 1j * pauli(2)


def ladder(dim: int) -> np.ndarray:
    """Truncated lowering operator on Fock levels 0..dim-1."""
    if dim < 2:
        raise ValueError(f"ladder dimension must be >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim)).astype(complex)


def fock(n: int, dim: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise ValueError(f"Fock level {n} outside truncated range 0..{dim - 1}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1
    return v


def lift(local, factor: int, space: SpaceSpec) -> Operator:
    """Embed a single-factor operator as identity ⊗ ... ⊗ local ⊗ ... ⊗ identity."""
    local = as_matrix(local)
    d = space.factors[factor].dim
    if local.shape != (d, d):
        raise DimensionError(f"local operator shape {local.shape} does not match factor dim {d}")
    if space.dim <= SPARSE_OPERATOR_DIM:
        mats = [local if i == factor else np.eye(f.dim) for i, f in enumerate(space.factors)]
        return Operator(kron_all(mats), space)
    m = sp.identity(1, dtype=complex, format="csr")
    for i, f in enumerate(space.factors):
        m = sp.kron(m, sp.csr_matrix(local) if i == factor else sp.identity(f.dim, format="csr"),
                    format="csr")
    return Operator(m, space)


def lift_s(local, space: SpaceSpec) -> Operator:
    return lift(local, space.s_indices[0], space)


def local_state(kind: str, dim: int, params: dict | None = None) -> np.ndarray:
    """Single-factor density matrix of the requested kind."""
    p = dict(params or {})
    if kind == "pauli_eigenstate":
        if dim != 2:
            raise DimensionError("pauli_eigenstate needs a qubit factor")
        axis, sign = int(p["axis"]), int(p.get("sign", 1))
        if sign not in (1, -1):
            raise ValueError(f"eigenvalue sign must be ±1, got {sign}")
        return 0.5 * (np.eye(2) + sign * pauli(axis))
    if kind == "bloch":
        if dim != 2:
            raise DimensionError("bloch state needs a qubit factor")
        r = np.asarray(p["r"], dtype=float)
        if r.shape != (3,):
            raise ValueError("Bloch vector must have three components")
        if np.linalg.norm(r) > 1 + 1e-12:
            raise ValueError(f"Bloch vector length {np.linalg.norm(r):.6g} exceeds 1")
        return 0.5 * (np.eye(2) + sum(r[k] * pauli(k + 1) for k in range(3)))
    if kind == "maximally_mixed":
        return np.eye(dim, dtype=complex) / dim
    if kind == "fock":
        n = int(p.get("n", 0))
        # the top truncated level is where ladder artifacts live; keep states below it
        if not 0 <= n < dim - 1:
            raise ValueError(f"Fock level {n} must lie below the cutoff {dim - 1}")
        v = fock(n, dim)
        return np.outer(v, v.conj())
    if kind == "coherent_truncated":
        alpha = p.get("alpha", 0.0)
        if isinstance(alpha, (list, tuple)):
            alpha = complex(alpha[0], alpha[1])
        alpha = complex(alpha)
        n = np.arange(dim)
        logfact = np.array([np.sum(np.log(np.arange(1, k + 1))) for k in n])
        amp = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * logfact) * np.power(alpha, n)
        amp = amp / np.linalg.norm(amp)
        return np.outer(amp, amp.conj())
    raise ValueError(f"unknown environment state kind {kind!r}")


def env_state(kind: str, space: SpaceSpec, **params) -> DensityMatrix:
    """Product state on every R factor of ``space`` (identical per factor)."""
    r = space.r_space()
    rho = kron_all([local_state(kind, f.dim, params) for f in r.factors])
    return DensityMatrix(Operator(rho, r))
