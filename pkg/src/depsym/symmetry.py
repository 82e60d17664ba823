"""Symmetry unitaries, symmetry defects and structural form templates.

A unitary U on S is a symmetry of the reduced dynamics for a given rho_R when

    Tr_R[rho_R e^{itH} U†QU e^{-itH}] = U† Tr_R[rho_R e^{itH} Q e^{-itH}] U

for every Q on S and every t. Everything here measures how far that equality
is from holding, on a finite operator basis and time grid.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ReducedTrajectory, reduce_grid, s_observable
from .linalg import DimensionError, as_matrix, evolve_unitary, hs_distance, kron_all
from .model import DensityMatrix, Factor, Operator, SpaceSpec, lift, number, pauli

ACCEPT_TOL = 1e-9
REJECT_TOL = 1e-4

UNITARY_KINDS = ("rot_z", "rot_axis", "rot_xy_pi", "g_group", "number_phase", "parity_pi",
                 "env_unitary", "custom")


def verdict(defect: float, accept: float = ACCEPT_TOL, reject: float = REJECT_TOL) -> str:
    if defect < accept:
        return "holds"
    if defect > reject:
        return "broken"
    return "inconclusive"


def _unit(v, what="axis") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{what} needs three components")
    n = np.linalg.norm(v)
    if abs(n - 1) > 1e-12:
        raise ValueError(f"{what} {tuple(v)} is not a unit vector (norm {n:.15g})")
    return v


def _complex_matrix(raw) -> np.ndarray:
    """Nested lists of numbers or [re, im] pairs -> complex matrix."""
    a = np.asarray(raw, dtype=float) if not isinstance(raw, np.ndarray) else raw
    if a.dtype.kind != "c" and a.ndim == 3 and a.shape[-1] == 2:
        a = a[..., 0] + 1j * a[..., 1]
    return np.asarray(a, dtype=complex)


@dataclass(frozen=True)
class UnitarySpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in UNITARY_KINDS:
            raise ValueError(f"unknown unitary kind {self.kind!r}")
        p = self.params
        need = {"rot_z": ("u",), "rot_axis": ("u", "axis"), "g_group": ("u", "alpha", "gamma"),
                "number_phase": ("u",), "custom": ("matrix",)}.get(self.kind, ())
        missing = [n for n in need if n not in p]
        if missing:
            raise ValueError(f"{self.kind}: missing parameters {missing}")
        if self.kind == "rot_axis":
            _unit(p["axis"])
        if self.kind == "g_group" and float(p["alpha"]) ** 2 + float(p["gamma"]) ** 2 == 0:
            raise ValueError("g_group needs alpha, gamma not both zero")
        if self.kind == "env_unitary" and "matrix" not in p and not {"axis", "u"} <= set(p):
            raise ValueError("env_unitary needs either 'matrix' or 'axis' and 'u'")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": _jsonable(self.params)}

    def generator_direction(self) -> np.ndarray | None:
        """Bloch direction of the qubit generator, when there is one."""
        p = self.params
        if self.kind == "rot_z":
            return np.array([0.0, 0.0, 1.0])
        if self.kind == "rot_axis":
            return np.asarray(p["axis"], dtype=float)
        if self.kind == "rot_xy_pi":
            return np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
        if self.kind == "g_group":
            v = np.array([float(p["alpha"]), float(p["gamma"]), 0.0])
            return v / np.linalg.norm(v)
        return None


def _jsonable(x):
    if isinstance(x, np.ndarray):
        x = x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def g_generator(alpha: float, gamma: float) -> np.ndarray:
    """(alpha Σ1 + gamma Σ2) / sqrt(alpha² + gamma²)."""
    return (alpha * pauli(1) + gamma * pauli(2)) / math.hypot(alpha, gamma)


def realize_local(spec: UnitarySpec, factor: Factor) -> np.ndarray:
    """Matrix of the unitary on a single factor (S, or one R factor for env_unitary)."""
    p, k, d = spec.params, spec.kind, factor.dim
    qubit_kinds = ("rot_z", "rot_axis", "rot_xy_pi", "g_group")
    if k in qubit_kinds and factor.kind != "qubit":
        raise DimensionError(f"{k} acts on a qubit, factor {factor.label!r} is an oscillator")
    if k in ("number_phase", "parity_pi") and factor.kind != "osc":
        raise DimensionError(f"{k} acts on an oscillator, factor {factor.label!r} is a qubit")
    if k == "rot_z":
        return evolve_unitary(0.5 * pauli(3), float(p["u"]))
    if k == "rot_axis":
        n = _unit(p["axis"])
        return evolve_unitary(0.5 * sum(n[i] * pauli(i + 1) for i in range(3)), float(p["u"]))
    if k == "rot_xy_pi":
        return -1j * (pauli(1) + pauli(2)) / math.sqrt(2)
    if k == "g_group":
        return evolve_unitary(0.5 * g_generator(float(p["alpha"]), float(p["gamma"])), float(p["u"]))
    if k == "number_phase":
        return evolve_unitary(number(d), float(p["u"]))
    if k == "parity_pi":
        return evolve_unitary(number(d), math.pi)
    if k == "env_unitary" and "matrix" not in p:
        if d != 2:
            raise DimensionError("axis-angle env_unitary needs qubit R factors")
        n = _unit(p["axis"])
        return evolve_unitary(0.5 * sum(n[i] * pauli(i + 1) for i in range(3)), float(p["u"]))
    m = _complex_matrix(p["matrix"])
    if m.shape != (d, d):
        raise DimensionError(f"unitary matrix shape {m.shape} does not match factor dimension {d}")
    if np.linalg.norm(m.conj().T @ m - np.eye(d)) > 1e-12:
        raise ValueError("supplied matrix is not unitary")
    return m


def realize(spec: UnitarySpec, space: SpaceSpec) -> Operator:
    """The unitary lifted to the full space (identity on complementary factors)."""
    if spec.kind == "env_unitary":
        mats = [realize_local(spec, f) if i in space.r_indices else np.eye(f.dim)
                for i, f in enumerate(space.factors)]
        return Operator(kron_all(mats), space)
    s = space.s_indices[0]
    return lift(realize_local(spec, space.factors[s]), s, space)


def env_matrix(spec: UnitarySpec, space: SpaceSpec) -> np.ndarray:
    """The env_unitary on the R factors only."""
    return kron_all([realize_local(spec, space.factors[i]) for i in space.r_indices])


def axis_frame(u1: float, u2: float, u3: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """X, Y, G for rotations about the unit axis (u1, u2, u3); poles are rejected."""
    u = _unit((u1, u2, u3))
    if u[0] ** 2 + u[1] ** 2 < 1e-24:
        raise ValueError("axis along ±z: X degenerates, use rot_z instead")
    s1, s2, s3 = pauli(1), pauli(2), pauli(3)
    X = -u[1] * s1 + u[0] * s2
    Y = -u[0] * u[2] * s1 - u[1] * u[2] * s2 + (u[0] ** 2 + u[1] ** 2) * s3
    G = u[0] * s1 + u[1] * s2 + u[2] * s3
    return X, Y, G


def frame_rotation(axis) -> np.ndarray:
    """Orthonormal rows (e_X, e_Y, e_G) matching :func:`axis_frame`."""
    u = _unit(axis)
    x = np.array([-u[1], u[0], 0.0])
    y = np.array([-u[0] * u[2], -u[1] * u[2], u[0] ** 2 + u[1] ** 2])
    if np.linalg.norm(x) < 1e-12:
        raise ValueError("axis along ±z has no X/Y frame")
    return np.stack([x / np.linalg.norm(x), y / np.linalg.norm(y), u])


# -- defects -------------------------------------------------------------------

def _s_unitary(spec: UnitarySpec, space: SpaceSpec) -> np.ndarray:
    if spec.kind == "env_unitary":
        raise ValueError("env_unitary acts on R; use env_invariance_defect")
    return realize_local(spec, space.s_factor())


def symmetry_defect_grid(h: Operator, rho_r: DensityMatrix, u_spec: UnitarySpec, q_basis: dict,
                         times) -> dict[str, np.ndarray]:
    """Per observable, the defect ‖LHS - RHS‖ at every time on the grid."""
    u = _s_unitary(u_spec, h.space)
    ud = u.conj().T
    obs = {}
    for label, q in q_basis.items():
        q = as_matrix(q)
        obs[("q", label)] = q
        obs[("uqu", label)] = ud @ q @ u
    red = reduce_grid(h, rho_r, obs, times)
    out = {}
    for label in q_basis:
        lhs = red[("uqu", label)]
        rhs = ud @ red[("q", label)] @ u
        out[label] = np.linalg.norm(lhs - rhs, axis=(1, 2))
    return out


def symmetry_defect(h: Operator, rho_r: DensityMatrix, u_spec: UnitarySpec, q_s, t: float) -> float:
    """Hilbert-Schmidt distance between the two sides of the reduced symmetry criterion."""
    return float(symmetry_defect_grid(h, rho_r, u_spec, {"q": q_s}, [t])["q"][0])


def symmetry_defect_full(w, h: Operator, u_spec: UnitarySpec, q_s, t: float) -> float:
    """|Tr[W e^{itH} U†QU e^{-itH}] - Tr[W U† e^{itH} Q e^{-itH} U]| for a full-space state W."""
    space = h.space
    w = as_matrix(w)
    if w.shape != (space.dim, space.dim):
        raise DimensionError(f"state shape {w.shape} does not match space dimension {space.dim}")
    e = evolve_unitary(h.dense(), t)
    u = realize(u_spec, space).dense()
    q = lift(q_s, space.s_indices[0], space).dense()
    lhs = np.trace(w @ e.conj().T @ u.conj().T @ q @ u @ e)
    rhs = np.trace(w @ u.conj().T @ e.conj().T @ q @ e @ u)
    return float(abs(lhs - rhs))


def default_basis(space: SpaceSpec, extras: dict | None = None) -> dict[str, np.ndarray]:
    """Operator basis for symmetry checks: I, Σ1..Σ3 for a qubit; A, A†, A†A, A², I for an oscillator."""
    labels = ("I", "S1", "S2", "S3") if space.s_factor().kind == "qubit" else ("A", "Adag", "N", "A2", "I")
    basis = {lab: s_observable(lab, space) for lab in labels}
    basis.update(extras or {})
    return basis


@dataclass
class SymmetryReport:
    unitary: UnitarySpec
    max_defect: float
    per_observable_defect: dict[str, float]
    accept: float = ACCEPT_TOL
    reject: float = REJECT_TOL
    matched_templates: dict[str, float] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return verdict(self.max_defect, self.accept, self.reject)

    @property
    def holds(self) -> bool:
        return self.max_defect < self.accept

    def to_dict(self) -> dict:
        return {
            "unitary": self.unitary.to_dict(),
            "max_defect": self.max_defect,
            "per_observable_defect": dict(self.per_observable_defect),
            "verdict": self.verdict,
            "tolerances": {"accept": self.accept, "reject": self.reject},
            "matched_templates": dict(self.matched_templates),
        }


def check_symmetry(h: Operator, rho_r: DensityMatrix, u_spec: UnitarySpec, q_basis: dict | None,
                   t_grid, accept: float = ACCEPT_TOL, reject: float = REJECT_TOL) -> SymmetryReport:
    """Largest symmetry defect over an operator basis and a time grid.

    The criterion is linear in Q, so a spanning basis covers the whole space it
    spans. A passing grid check is necessary, not sufficient, for all t.
    """
    if q_basis is None:
        q_basis = default_basis(h.space)
    if u_spec.kind == "env_unitary":
        per = env_invariance_grid(h, rho_r, u_spec, q_basis, t_grid)
    else:
        per = symmetry_defect_grid(h, rho_r, u_spec, q_basis, t_grid)
    per = {k: float(np.max(v)) for k, v in per.items()}
    return SymmetryReport(u_spec, max(per.values()), per, accept, reject)


def env_invariance_grid(h: Operator, rho_r: DensityMatrix, u_r, q_basis: dict, times) -> dict[str, np.ndarray]:
    space = h.space
    m = env_matrix(u_r, space) if isinstance(u_r, UnitarySpec) else as_matrix(u_r)
    if m.shape != (space.r_dim, space.r_dim):
        raise DimensionError(f"R unitary shape {m.shape} does not match R dimension {space.r_dim}")
    moved = DensityMatrix(Operator(m @ rho_r.matrix @ m.conj().T, rho_r.space))
    a = reduce_grid(h, rho_r, q_basis, times)
    b = reduce_grid(h, moved, q_basis, times)
    return {k: np.linalg.norm(a[k] - b[k], axis=(1, 2)) for k in q_basis}


def env_invariance_defect(h: Operator, rho_r: DensityMatrix, u_r, q_basis: dict | None, t_grid) -> float:
    """Max distance between reduced images for rho_R and U_R rho_R U_R†."""
    if q_basis is None:
        q_basis = default_basis(h.space)
    per = env_invariance_grid(h, rho_r, u_r, q_basis, t_grid)
    return float(max(np.max(v) for v in per.values()))


# -- form templates -------------------------------------------------------------

@dataclass(frozen=True)
class FormTemplate:
    """Homogeneous linear relations among coefficient functions.

    Each constraint is a tuple of ((observable, component), weight) terms whose
    weighted sum must vanish at every t. Qubit templates may carry a ``frame``
    (rows e_X, e_Y, e_G): coefficients are then rotated into that frame and
    the labels S1, S2, S3 stand for X, Y, G.
    """

    name: str
    kind: str  # "qubit" or "osc"
    constraints: tuple
    frame: tuple | None = None

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind,
             "constraints": [[[o, c, w] for (o, c), w in con] for con in self.constraints]}
        if self.frame is not None:
            d["frame"] = [list(r) for r in self.frame]
        return d


def _eq(a, b, sign=-1):
    return ((a, 1.0), (b, float(sign)))


def _zero(a):
    return ((a, 1.0),)


_ZEROS_AB = tuple(_zero(x) for x in [("S1", "S3"), ("S1", "I"), ("S2", "S3"), ("S2", "I"),
                                     ("S3", "S1"), ("S3", "S2")])
_FORM_A = (
    _eq(("S1", "S1"), ("S2", "S2")),
    _eq(("S1", "S2"), ("S2", "S1"), +1),
) + _ZEROS_AB

TEMPLATES: dict[str, FormTemplate] = {
    "FORM_A": FormTemplate("FORM_A", "qubit", _FORM_A),
    "FORM_A_NO_B": FormTemplate("FORM_A_NO_B", "qubit", _FORM_A + (_zero(("S1", "S2")),)),
    "FORM_A_NO_D": FormTemplate("FORM_A_NO_D", "qubit", _FORM_A + (_zero(("S3", "I")),)),
    "FORM_B": FormTemplate("FORM_B", "qubit", _ZEROS_AB),
    "FORM_C": FormTemplate("FORM_C", "qubit", (
        _eq(("S2", "S1"), ("S1", "S2")),
        _eq(("S2", "S2"), ("S1", "S1")),
        _eq(("S2", "S3"), ("S1", "S3"), +1),
        _eq(("S2", "I"), ("S1", "I")),
        _eq(("S3", "S2"), ("S3", "S1"), +1),
        _zero(("S3", "I")),
    )),
    "FORM_OSC_F": FormTemplate("FORM_OSC_F", "osc", (_zero(("A", "g")), _zero(("A", "b")))),
    "FORM_OSC_FG": FormTemplate("FORM_OSC_FG", "osc", (_zero(("A", "b")),)),
    "FORM_OSC_FGB": FormTemplate("FORM_OSC_FGB", "osc", ()),
}

_FRAME_RE = re.compile(r"^(FORM_A(?:_NO_B|_NO_D)?)\[([^\]]+)\]$")


def form_a_about(axis, base: str = "FORM_A") -> FormTemplate:
    """FORM_A (or a variant) with Σ1, Σ2, Σ3 replaced by the X, Y, G frame of ``axis``."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    rot = frame_rotation(axis)
    name = f"{base}[{','.join(f'{x:.6g}' for x in axis)}]"
    return FormTemplate(name, "qubit", TEMPLATES[base].constraints, tuple(map(tuple, rot)))


def get_template(name: str) -> FormTemplate:
    """Look up a built-in template; ``FORM_A[x,y,z]`` builds the rotated form about that axis."""
    if name in TEMPLATES:
        return TEMPLATES[name]
    m = _FRAME_RE.match(name)
    if m:
        axis = [float(x) for x in m.group(2).split(",")]
        if len(axis) != 3:
            raise ValueError(f"template {name!r}: axis needs three components")
        return form_a_about(axis, m.group(1))
    raise KeyError(f"unknown form template {name!r}")


def _framed_coeffs(traj: ReducedTrajectory, frame) -> dict:
    rot = np.asarray(frame, dtype=float)
    labels = ("S1", "S2", "S3")
    M = np.stack([np.stack([traj.coeffs[o][c] for c in labels], axis=-1) for o in labels], axis=-2)  # (T,3,3)
    ident = np.stack([traj.coeffs[o]["I"] for o in labels], axis=-1)  # (T,3)
    Mf = np.einsum("ai,tij,bj->tab", rot, M, rot)
    idf = np.einsum("ai,ti->ta", rot, ident)
    out = {}
    for a, o in enumerate(labels):
        out[o] = {c: Mf[:, a, b] for b, c in enumerate(labels)}
        out[o]["I"] = idf[:, a]
    return out


def form_violation_series(traj: ReducedTrajectory, template: FormTemplate | str) -> np.ndarray:
    """Per time point, the largest |constraint| of the template."""
    if isinstance(template, str):
        template = get_template(template)
    if template.kind != traj.kind:
        raise ValueError(f"template {template.name} is for {template.kind} systems, trajectory is {traj.kind}")
    needed = {o for con in template.constraints for (o, _), _ in con}
    if template.frame is not None:
        needed |= {"S1", "S2", "S3"}
    missing = needed - set(traj.observables)
    if missing:
        raise ValueError(f"template {template.name} needs observables {sorted(missing)}")
    coeffs = traj.coeffs if template.frame is None else _framed_coeffs(traj, template.frame)
    worst = np.zeros(len(traj.times))
    for con in template.constraints:
        val = sum(w * coeffs[o][c] for (o, c), w in con)
        worst = np.maximum(worst, np.abs(val))
    return worst


def form_violation(traj: ReducedTrajectory, template: FormTemplate | str) -> float:
    return float(np.max(form_violation_series(traj, template)))


__all__ = [
    "UnitarySpec", "FormTemplate", "SymmetryReport", "TEMPLATES", "realize", "realize_local",
    "axis_frame", "symmetry_defect", "symmetry_defect_grid", "symmetry_defect_full", "check_symmetry",
    "env_invariance_defect", "form_violation", "form_violation_series", "get_template", "form_a_about",
    "default_basis", "verdict", "g_generator", "hs_distance", "ACCEPT_TOL", "REJECT_TOL",
]
