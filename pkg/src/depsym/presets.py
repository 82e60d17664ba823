"""Built-in scenarios, one or more per worked example.

Each preset carries its expected verdicts, so running the whole catalog is a
regression suite for the package.
"""
from __future__ import annotations

import math

from .scenario import ScenarioConfig

_AXIS = [1 / 3, 2 / 3, 2 / 3]
_ISO_AXIS = [0.6, 0.0, 0.8]


def _xyz(g1, g2, g3):
    return {"family": "xyz", "params": {"gamma1": g1, "gamma2": g2, "gamma3": g3}}


def _osc(family, omega, eta, cutoff):
    return {"family": family, "params": {"omega": omega, "eta": eta, "cutoff": cutoff}}


_RAW: dict[str, dict] = {
    "IIA1-rotz": dict(
        description="xyz exchange with γ1 = γ2 and an environment polarized along z: rotations about z survive",
        hamiltonian=_xyz(1.0, 1.0, 0.6),
        env_state={"kind": "bloch", "params": {"r": [0.0, 0.0, 0.5]}},
        unitaries=[{"kind": "rot_z", "params": {"u": 0.7}}, {"kind": "rot_z", "params": {"u": math.pi}}],
        templates=["FORM_A", "FORM_A_NO_B", "FORM_A_NO_D", "FORM_C"],
        expected={"symmetries": ["holds", "holds"],
                  "templates": {"FORM_A": True, "FORM_A_NO_B": False, "FORM_A_NO_D": False, "FORM_C": False}},
    ),
    "IIA1-rotz-gamma3-zero": dict(
        description="as IIA1-rotz with γ3 = 0, which removes the antisymmetric Σ1/Σ2 mixing b(t)",
        hamiltonian=_xyz(1.0, 1.0, 0.0),
        env_state={"kind": "bloch", "params": {"r": [0.0, 0.0, 0.5]}},
        unitaries=[{"kind": "rot_z", "params": {"u": 0.7}}],
        templates=["FORM_A", "FORM_A_NO_B", "FORM_A_NO_D"],
        expected={"symmetries": ["holds"],
                  "templates": {"FORM_A": True, "FORM_A_NO_B": True, "FORM_A_NO_D": False}},
    ),
    "IIA1-rotz-unpolarized": dict(
        description="as IIA1-rotz with a maximally mixed environment: d(t) vanishes and every R unitary leaves it alone",
        hamiltonian=_xyz(1.0, 1.0, 0.6),
        env_state={"kind": "maximally_mixed"},
        unitaries=[{"kind": "rot_z", "params": {"u": 0.7}},
                   {"kind": "env_unitary", "params": {"axis": [1.0, 0.0, 0.0], "u": math.pi / 2}}],
        templates=["FORM_A", "FORM_A_NO_D"],
        expected={"symmetries": ["holds", "holds"], "templates": {"FORM_A": True, "FORM_A_NO_D": True}},
    ),
    "IIA1-discrete-pi": dict(
        description="anisotropic xyz with Ξ3 = +1: only the u = π rotation about z remains",
        hamiltonian=_xyz(1.0, 2.0, 3.0),
        env_state={"kind": "pauli_eigenstate", "params": {"axis": 3, "sign": 1}},
        unitaries=[{"kind": "rot_z", "params": {"u": math.pi}}, {"kind": "rot_z", "params": {"u": 0.7}}],
        templates=["FORM_B", "FORM_A"],
        expected={"symmetries": ["holds", "broken"], "templates": {"FORM_B": True, "FORM_A": False}},
    ),
    "IIA1-broken": dict(
        description="anisotropic xyz with Ξ1 = +1 and a quarter turn about z: the symmetry fails",
        hamiltonian=_xyz(1.0, 2.0, 3.0),
        env_state={"kind": "pauli_eigenstate", "params": {"axis": 1, "sign": 1}},
        unitaries=[{"kind": "rot_z", "params": {"u": math.pi / 2}}],
        expected={"symmetries": ["broken"]},
    ),
    "IIA1-axis": dict(
        description="isotropic exchange with the environment Bloch vector along a tilted axis",
        hamiltonian=_xyz(1.0, 1.0, 1.0),
        env_state={"kind": "bloch", "params": {"r": [0.6 * x for x in _AXIS]}},
        unitaries=[{"kind": "rot_axis", "params": {"u": 0.9, "axis": _AXIS}},
                   {"kind": "rot_z", "params": {"u": 0.9}}],
        templates=["FORM_A[1,2,2]", "FORM_A"],
        expected={"symmetries": ["holds", "broken"], "templates": {"FORM_A[1,2,2]": True, "FORM_A": False}},
    ),
    "IIA1-isotropic": dict(
        description="isotropic exchange, environment aligned with the rotation axis (0.6, 0, 0.8)",
        hamiltonian=_xyz(0.7, 0.7, 0.7),
        env_state={"kind": "bloch", "params": {"r": [0.9 * x for x in _ISO_AXIS]}},
        unitaries=[{"kind": "rot_axis", "params": {"u": 1.3, "axis": _ISO_AXIS}}],
        templates=["FORM_A[0.6,0,0.8]"],
        expected={"symmetries": ["holds"], "templates": {"FORM_A[0.6,0,0.8]": True}},
    ),
    "IIA1-rotxy": dict(
        description="γ1 = γ2 with ⟨Ξ1⟩ = ⟨Ξ2⟩ and ⟨Ξ3⟩ = 0: the half-turn about (1,1,0) survives",
        hamiltonian=_xyz(1.0, 1.0, 0.7),
        env_state={"kind": "bloch", "params": {"r": [0.4, 0.4, 0.0]}},
        unitaries=[{"kind": "rot_xy_pi"}, {"kind": "rot_z", "params": {"u": 0.7}}],
        templates=["FORM_C", "FORM_A"],
        expected={"symmetries": ["holds", "broken"], "templates": {"FORM_C": True, "FORM_A": False}},
    ),
    "IIA2-tilted-plus": dict(
        description="tilted Hamiltonian with Ξ2 = +1: the G rotations are symmetries and G is conserved",
        hamiltonian={"family": "tilted", "params": {"alpha": 0.8, "gamma": 0.6}},
        env_state={"kind": "pauli_eigenstate", "params": {"axis": 2, "sign": 1}},
        unitaries=[{"kind": "g_group", "params": {"u": 0.9, "alpha": 0.8, "gamma": 0.6}}],
        t_grid={"t_max": 4 * math.pi},
        constant_observables=["dir:0.8,0.6,0"],
        expected={"symmetries": ["holds"], "constants": {"dir:0.8,0.6,0": True}},
    ),
    "IIA2-tilted-minus": dict(
        description="tilted Hamiltonian with γ flipped and Ξ2 = -1: the same G rotations survive",
        hamiltonian={"family": "tilted", "params": {"alpha": 0.8, "gamma": -0.6}},
        env_state={"kind": "pauli_eigenstate", "params": {"axis": 2, "sign": -1}},
        unitaries=[{"kind": "g_group", "params": {"u": 0.9, "alpha": 0.8, "gamma": 0.6}}],
        t_grid={"t_max": 4 * math.pi},
        constant_observables=["dir:0.8,0.6,0"],
        expected={"symmetries": ["holds"], "constants": {"dir:0.8,0.6,0": True}},
    ),
    "IIC1-beamsplitter": dict(
        description="two coupled modes, one Fock quantum in B: phase and parity symmetries, pure f(t) form",
        hamiltonian=_osc("beamsplitter", 1.0, 0.6, 40),
        env_state={"kind": "fock", "params": {"n": 1}},
        observables=["A", "Adag"],
        unitaries=[{"kind": "number_phase", "params": {"u": 0.7}}, {"kind": "parity_pi"}],
        templates=["FORM_OSC_F", "FORM_OSC_FG"],
        fit_levels=30,
        cutoff_bump=5,
        expected={"symmetries": ["holds", "holds"], "templates": {"FORM_OSC_F": True, "FORM_OSC_FG": True},
                  "leakage_below": 1e-9},
    ),
    "IIC2-squeezer": dict(
        description="two-mode squeezing from vacuum: parity survives, phase rotations do not",
        hamiltonian=_osc("squeezer", 1.0, 0.6, 60),
        env_state={"kind": "fock", "params": {"n": 0}},
        unitaries=[{"kind": "number_phase", "params": {"u": 0.7}}, {"kind": "parity_pi"}],
        templates=["FORM_OSC_F", "FORM_OSC_FG"],
        t_grid={"t_max": 0.5, "points": 51},
        fit_levels=4,
        cutoff_bump=10,
        expected={"symmetries": ["broken", "holds"], "templates": {"FORM_OSC_F": False, "FORM_OSC_FG": True},
                  "leakage_below": 1e-6},
    ),
    "IIC3-coherent-nonzero-b": dict(
        description="beamsplitter with a coherent B mode: a c-number drift b(t) appears and no symmetry is left",
        hamiltonian=_osc("beamsplitter", 1.0, 0.5, 40),
        env_state={"kind": "coherent_truncated", "params": {"alpha": 1.0}},
        unitaries=[{"kind": "number_phase", "params": {"u": 0.7}}, {"kind": "parity_pi"}],
        templates=["FORM_OSC_F", "FORM_OSC_FG", "FORM_OSC_FGB"],
        fit_levels=20,
        cutoff_bump=5,
        expected={"symmetries": ["broken", "broken"],
                  "templates": {"FORM_OSC_F": False, "FORM_OSC_FG": False, "FORM_OSC_FGB": True},
                  "leakage_below": 1e-8},
    ),
    "IIE-many-osc": dict(
        description="qubit coupled to two vacuum oscillators: z rotations survive",
        hamiltonian={"family": "spin_boson_many", "params": {"omega": 1.0, "k": 2, "cutoff": 8}},
        env_state={"kind": "fock", "params": {"n": 0}},
        unitaries=[{"kind": "rot_z", "params": {"u": 0.7}}],
        templates=["FORM_A"],
        cutoff_bump=2,
        expected={"symmetries": ["holds"], "templates": {"FORM_A": True}, "leakage_below": 1e-9},
    ),
    "IIIA-nothing": dict(
        description="isotropic exchange with a maximally mixed environment: no Bloch direction is conserved",
        hamiltonian=_xyz(1.0, 1.0, 1.0),
        env_state={"kind": "maximally_mixed"},
        unitaries=[{"kind": "rot_z", "params": {"u": 0.7}}],
        constants_scan=True,
        constant_observables=["S3"],
        expected={"symmetries": ["holds"], "classification": "none_constant", "constants": {"S3": False}},
    ),
    "IIIB-everything": dict(
        description="decoupling Hamiltonian with Ξ2 = +1: the coupling vanishes and every observable is conserved",
        hamiltonian={"family": "decoupler", "params": {"omega": 1.0}},
        env_state={"kind": "pauli_eigenstate", "params": {"axis": 2, "sign": 1}},
        constants_scan=True,
        constant_observables=["S1", "S2", "S3"],
        expected={"classification": "all_constant", "constants": {"S1": True, "S2": True, "S3": True}},
    ),
    "IIIC-generator": dict(
        description="tilted Hamiltonian with Ξ2 = +1: G is conserved, Σ3 is not",
        hamiltonian={"family": "tilted", "params": {"alpha": 0.8, "gamma": 0.6}},
        env_state={"kind": "pauli_eigenstate", "params": {"axis": 2, "sign": 1}},
        unitaries=[{"kind": "g_group", "params": {"u": 0.9, "alpha": 0.8, "gamma": 0.6}}],
        t_grid={"t_max": 4 * math.pi},
        constants_scan=True,
        constant_observables=["dir:0.8,0.6,0", "S3"],
        expected={"symmetries": ["holds"], "classification": "some_constant", "scan_contains": [[0.8, 0.6, 0.0]],
                  "constants": {"dir:0.8,0.6,0": True, "S3": False}},
    ),
}
_RAW["IIIB-decoupler"] = dict(_RAW["IIIB-everything"])

for _k in (1, 2, 3):
    _RAW[f"IIB-spin-star-{_k}"] = dict(
        description=f"central qubit exchanging with {_k} maximally mixed qubit(s): z rotations, no b or d terms",
        hamiltonian={"family": "spin_star", "params": {"omega": 1.0, "k": _k}},
        env_state={"kind": "maximally_mixed"},
        unitaries=[{"kind": "rot_z", "params": {"u": 0.7}}],
        templates=["FORM_A", "FORM_A_NO_B", "FORM_A_NO_D"],
        expected={"symmetries": ["holds"],
                  "templates": {"FORM_A": True, "FORM_A_NO_B": True, "FORM_A_NO_D": True}},
    )

for _n in (0, 1, 2):
    _RAW[f"IID-jc-{_n}"] = dict(
        description=f"Jaynes-Cummings coupling with the field in Fock state {_n}: z rotations survive; "
                    "Σ3 oscillates",
        hamiltonian={"family": "jaynes_cummings", "params": {"omega": 1.0, "cutoff": 40}},
        env_state={"kind": "fock", "params": {"n": _n}},
        unitaries=[{"kind": "rot_z", "params": {"u": 0.7}}],
        templates=["FORM_A"],
        constant_observables=["S3"],
        cutoff_bump=5,
        expected={"symmetries": ["holds"], "templates": {"FORM_A": True}, "constants": {"S3": False},
                  "leakage_below": 1e-12},
    )
_RAW["IID-jc-0"]["claims"] = [{
    "kind": "constant", "observable": "S3", "asserted": True,
    "note": "Σ3 asserted to be a constant of the motion for the vacuum field",
}]


def _build(name: str, raw: dict) -> ScenarioConfig:
    return ScenarioConfig.model_validate({"name": name, **raw})


PRESETS: dict[str, ScenarioConfig] = {name: _build(name, raw) for name, raw in _RAW.items()}


def list_presets() -> dict[str, str]:
    """Preset name -> one-line description."""
    return {name: cfg.description for name, cfg in PRESETS.items()}


def get_preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name].model_copy(deep=True)
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


__all__ = ["PRESETS", "list_presets", "get_preset"]
