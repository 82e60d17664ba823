"""Builders for the Hamiltonian families studied here.

Every builder returns an :class:`Operator` on the layout given by
:func:`space_of`, with the system S as factor 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .linalg import SPARSE_OPERATOR_DIM
from .model import Operator, SpaceSpec, bipartite, ladder, lift, osc, pauli, qubit, sigma_pm

MAX_SPIN_STAR = 6
MAX_MANY_OSC = 2
MAX_MANY_OSC_CUTOFF = 12

# parameter names per family, in the order used for positional construction
FAMILIES: dict[str, tuple[str, ...]] = {
    "xyz": ("gamma1", "gamma2", "gamma3"),
    "tilted": ("alpha", "gamma"),
    "spin_star": ("omega", "k"),
    "beamsplitter": ("omega", "eta", "cutoff"),
    "squeezer": ("omega", "eta", "cutoff"),
    "jaynes_cummings": ("omega", "cutoff"),
    "spin_boson_many": ("omega", "k", "cutoff"),
    "decoupler": ("omega",),
}
_INTEGER_PARAMS = {"k", "cutoff"}


@dataclass(frozen=True)
class HamiltonianSpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown Hamiltonian family {self.family!r}")
        names = FAMILIES[self.family]
        missing = [n for n in names if n not in self.params]
        extra = [n for n in self.params if n not in names]
        if missing or extra:
            raise ValueError(f"{self.family}: expected parameters {names}, "
                             f"missing {missing}, unexpected {extra}")
        clean = {}
        for n in names:
            v = self.params[n]
            if n in _INTEGER_PARAMS:
                if isinstance(v, bool) or int(v) != v or int(v) < 1:
                    raise ValueError(f"{self.family}: {n} must be a positive integer, got {v!r}")
                clean[n] = int(v)
            else:
                v = float(v)
                if not math.isfinite(v):
                    raise ValueError(f"{self.family}: {n} must be finite, got {v!r}")
                clean[n] = v
        if self.family == "spin_star" and clean["k"] > MAX_SPIN_STAR:
            raise ValueError(f"spin_star supports k <= {MAX_SPIN_STAR}")
        if self.family == "spin_boson_many":
            if clean["k"] > MAX_MANY_OSC or clean["cutoff"] > MAX_MANY_OSC_CUTOFF:
                raise ValueError(f"spin_boson_many supports k <= {MAX_MANY_OSC} "
                                 f"and cutoff <= {MAX_MANY_OSC_CUTOFF}")
        if "cutoff" in clean and clean["cutoff"] < 3:
            raise ValueError("oscillator cutoff must be >= 3")
        object.__setattr__(self, "params", clean)

    @classmethod
    def of(cls, family: str, *args, **kw) -> "HamiltonianSpec":
        names = FAMILIES.get(family, ())
        params = dict(zip(names, args))
        params.update(kw)
        return cls(family, params)

    def with_cutoff(self, cutoff: int) -> "HamiltonianSpec":
        if "cutoff" not in self.params:
            raise ValueError(f"{self.family} has no oscillator cutoff")
        return HamiltonianSpec(self.family, {**self.params, "cutoff": cutoff})

    @property
    def cutoff(self) -> int | None:
        return self.params.get("cutoff")

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}


def space_of(spec: HamiltonianSpec) -> SpaceSpec:
    p = spec.params
    fam = spec.family
    if fam in ("xyz", "tilted", "decoupler"):
        return bipartite(qubit("S"), qubit("R"))
    if fam == "spin_star":
        return bipartite(qubit("S"), *[qubit(f"R{k}") for k in range(p["k"])])
    if fam in ("beamsplitter", "squeezer"):
        return bipartite(osc("A", p["cutoff"]), osc("B", p["cutoff"]))
    if fam == "jaynes_cummings":
        return bipartite(qubit("S"), osc("B", p["cutoff"]))
    if fam == "spin_boson_many":
        return bipartite(qubit("S"), *[osc(f"B{k}", p["cutoff"]) for k in range(p["k"])])
    raise ValueError(fam)


def build(spec: HamiltonianSpec) -> Operator:
    space = space_of(spec)
    p = spec.params
    fam = spec.family

    # assemble in CSR so oscillator pairs at large cutoff stay cheap
    def S(m):
        return sp.csr_matrix(lift(m, 0, space).matrix)

    def R(m, i=1):
        return sp.csr_matrix(lift(m, i, space).matrix)

    if fam == "xyz":
        g = (p["gamma1"], p["gamma2"], p["gamma3"])
        h = 0.5 * sum(g[k - 1] * S(pauli(k)) @ R(pauli(k)) for k in (1, 2, 3))
    elif fam == "tilted":
        h = p["alpha"] * S(pauli(1)) + p["gamma"] * S(pauli(2)) @ R(pauli(2))
    elif fam == "decoupler":
        h = p["omega"] * (S(pauli(2)) - S(pauli(2)) @ R(pauli(2)))
    elif fam == "spin_star":
        sp_, sm_ = S(sigma_pm("+")), S(sigma_pm("-"))
        h = p["omega"] * sum(sp_ @ R(sigma_pm("-"), i) + sm_ @ R(sigma_pm("+"), i)
                             for i in space.r_indices)
    elif fam in ("beamsplitter", "squeezer"):
        a = S(ladder(space.factors[0].dim))
        b = R(ladder(space.factors[1].dim))
        plus, minus = a + b, a - b
        w, e = p["omega"], p["eta"]
        if fam == "beamsplitter":
            h = 0.5 * w * plus.conj().T @ plus + 0.5 * e * minus.conj().T @ minus
        else:
            pd, md = plus.conj().T, minus.conj().T
            h = 0.5j * w * (pd @ pd - plus @ plus) + 0.5j * e * (md @ md - minus @ minus)
    elif fam in ("jaynes_cummings", "spin_boson_many"):
        sp_, sm_ = S(sigma_pm("+")), S(sigma_pm("-"))
        h = 0
        for i in space.r_indices:
            b = R(ladder(space.factors[i].dim), i)
            h = h + p["omega"] * (sp_ @ b + sm_ @ b.conj().T)
    else:  # pragma: no cover - guarded by HamiltonianSpec
        raise ValueError(fam)
    if sp.issparse(h) and space.dim <= SPARSE_OPERATOR_DIM:
        h = h.toarray()
    return Operator(h, space)


def characteristic_period(spec: HamiltonianSpec) -> float:
    """2π over the largest coupling constant of the family."""
    p = spec.params
    scale = max((abs(v) for n, v in p.items() if n not in _INTEGER_PARAMS), default=0.0)
    return 2 * math.pi / scale if scale > 0 else 2 * math.pi
