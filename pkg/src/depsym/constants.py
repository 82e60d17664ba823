"""Dependent constants of the motion.

An S observable Q is a constant for a given rho_R when its reduced
Heisenberg image equals Q at every t. For the "any function f(Q)" closure we
test every spectral projector of Q, which spans all such functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import reduce_grid
from .linalg import as_matrix, check_hermitian
from .model import DensityMatrix, Operator, pauli
from .symmetry import ACCEPT_TOL, REJECT_TOL, verdict

CLUSTER_TOL = 1e-9
N_DIRECTIONS = 200


def _hermitian_s(q) -> np.ndarray:
    return as_matrix(check_hermitian(q))


def constant_defect_grid(h: Operator, rho_r: DensityMatrix, q_s, times) -> np.ndarray:
    q = _hermitian_s(q_s)
    red = reduce_grid(h, rho_r, {"q": q}, times)["q"]
    return np.linalg.norm(red - q, axis=(1, 2))


def constant_defect(h: Operator, rho_r: DensityMatrix, q_s, t: float) -> float:
    """‖reduced image of q_s at t − q_s‖ in Hilbert-Schmidt norm."""
    return float(constant_defect_grid(h, rho_r, q_s, [t])[0])


def spectral_projectors(q, tol: float = CLUSTER_TOL) -> list[tuple[float, np.ndarray]]:
    """(eigenvalue, projector) pairs, eigenvalues closer than ``tol`` merged."""
    q = _hermitian_s(q)
    w, v = np.linalg.eigh(0.5 * (q + q.conj().T))
    groups: list[list[int]] = []
    for i in range(len(w)):
        if groups and w[i] - w[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [(float(np.mean(w[g])), v[:, g] @ v[:, g].conj().T) for g in groups]


def constant_defect_spectral_grid(h: Operator, rho_r: DensityMatrix, q_s, times) -> list[tuple[float, np.ndarray]]:
    projs = spectral_projectors(q_s)
    red = reduce_grid(h, rho_r, {i: p for i, (_, p) in enumerate(projs)}, times)
    return [(lam, np.linalg.norm(red[i] - p, axis=(1, 2))) for i, (lam, p) in enumerate(projs)]


def constant_defect_spectral(h: Operator, rho_r: DensityMatrix, q_s, t: float) -> list[tuple[float, float]]:
    """Defect of each spectral projector of q_s at time t, keyed by eigenvalue."""
    return [(lam, float(d[0])) for lam, d in constant_defect_spectral_grid(h, rho_r, q_s, [t])]


@dataclass
class ConstantReport:
    observable: str
    max_defect: float
    projector_defects: list[tuple[float, float]]
    accept: float = ACCEPT_TOL
    reject: float = REJECT_TOL
    defect_trajectory: np.ndarray | None = field(default=None, repr=False)

    @property
    def verdict(self) -> str:
        # a constant needs every projector below tolerance, not just Q itself
        worst = max([self.max_defect] + [d for _, d in self.projector_defects])
        return verdict(worst, self.accept, self.reject)

    @property
    def is_constant(self) -> bool:
        return self.verdict == "holds"

    def to_dict(self) -> dict:
        d = {"observable": self.observable, "max_defect": self.max_defect,
             "projector_defects": [{"eigenvalue": lam, "max_defect": x} for lam, x in self.projector_defects],
             "verdict": self.verdict, "tolerances": {"accept": self.accept, "reject": self.reject}}
        if self.defect_trajectory is not None:
            d["defect_trajectory"] = [float(x) for x in self.defect_trajectory]
        return d


def constant_report(h: Operator, rho_r: DensityMatrix, q_s, t_grid, label: str = "Q",
                    accept: float = ACCEPT_TOL, reject: float = REJECT_TOL) -> ConstantReport:
    traj = constant_defect_grid(h, rho_r, q_s, t_grid)
    proj = [(lam, float(np.max(d))) for lam, d in constant_defect_spectral_grid(h, rho_r, q_s, t_grid)]
    return ConstantReport(label, float(np.max(traj)), proj, accept, reject, traj)


def bloch_operator(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return sum(n[k] * pauli(k + 1) for k in range(3))


def fibonacci_directions(count: int = N_DIRECTIONS) -> np.ndarray:
    """Quasi-uniform unit vectors on the sphere (deterministic golden-angle spiral)."""
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    phi = math.pi * (3 - math.sqrt(5)) * i
    rho = np.sqrt(1 - z ** 2)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


@dataclass
class ConstantScan:
    classification: str  # none_constant, all_constant, some_constant or inconclusive
    directions: np.ndarray  # (n, 3)
    max_defects: np.ndarray  # (n,)
    accept: float = ACCEPT_TOL
    reject: float = REJECT_TOL

    @property
    def verdicts(self) -> list[str]:
        return [verdict(d, self.accept, self.reject) for d in self.max_defects]

    @property
    def constant_directions(self) -> np.ndarray:
        return self.directions[self.max_defects < self.accept]

    @property
    def defect_floor(self) -> float:
        return float(np.min(self.max_defects))

    def contains(self, n, tol: float = 1e-9) -> bool:
        """Whether direction ±n is among the constant directions."""
        n = np.asarray(n, dtype=float) / np.linalg.norm(n)
        return any(abs(abs(c @ n) - 1) < tol for c in self.constant_directions)

    def rows(self):
        for n, d, v in zip(self.directions, self.max_defects, self.verdicts):
            yield float(n[0]), float(n[1]), float(n[2]), float(d), v

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "n_directions": len(self.directions),
            "defect_floor": self.defect_floor,
            "max_defect": float(np.max(self.max_defects)),
            "constant_directions": [list(map(float, n)) for n in self.constant_directions],
            "inconclusive": int(sum(v == "inconclusive" for v in self.verdicts)),
            "tolerances": {"accept": self.accept, "reject": self.reject},
        }


def scan_constants(h: Operator, rho_r: DensityMatrix, t_grid, accept: float = ACCEPT_TOL,
                   reject: float = REJECT_TOL, extra_directions=(), count: int = N_DIRECTIONS) -> ConstantScan:
    """Scan unit Bloch directions n for constancy of n·Σ.

    The reduced map is linear, so the three images of Σ1, Σ2, Σ3 are computed
    once and every direction is a combination of them. Projectors of n·Σ are
    (I ± n·Σ)/2, whose defects are half that of n·Σ, so the direction test
    already decides the spectral criterion.
    """
    if h.space.s_factor().kind != "qubit":
        raise ValueError("constant scans need a qubit system")
    red = reduce_grid(h, rho_r, {k: pauli(k) for k in (1, 2, 3)}, t_grid)
    diff = np.stack([red[k] - pauli(k) for k in (1, 2, 3)])  # (3, T, 2, 2)
    dirs = [np.eye(3), fibonacci_directions(count)]
    extra = [np.asarray(n, dtype=float) for n in extra_directions]
    if extra:
        dirs.insert(1, np.stack([n / np.linalg.norm(n) for n in extra]))
    dirs = np.concatenate(dirs)
    comb = np.einsum("nk,ktab->ntab", dirs, diff)
    defects = np.linalg.norm(comb, axis=(2, 3)).max(axis=1)
    if np.all(defects < accept):
        cls = "all_constant"
    elif np.any(defects < accept):
        cls = "some_constant"
    elif np.all(defects > reject):
        cls = "none_constant"
    else:
        cls = "inconclusive"
    return ConstantScan(cls, dirs, defects, accept, reject)


def parse_direction_label(label: str) -> tuple[str, np.ndarray]:
    """'S1'..'S3' or 'dir:x,y,z' -> (label, Bloch operator)."""
    if label in ("S1", "S2", "S3"):
        return label, pauli(int(label[1]))
    if label.startswith("dir:"):
        n = np.array([float(x) for x in label[4:].split(",")])
        if n.shape != (3,) or not np.linalg.norm(n) > 0:
            raise ValueError(f"direction {label!r} needs three components, not all zero")
        return label, bloch_operator(n / np.linalg.norm(n))
    raise ValueError(f"constant observable {label!r}: use S1, S2, S3 or dir:x,y,z")


__all__ = [
    "ConstantReport", "ConstantScan", "constant_defect", "constant_defect_grid", "constant_defect_spectral",
    "constant_report", "scan_constants", "spectral_projectors", "fibonacci_directions", "bloch_operator",
    "parse_direction_label",
]
