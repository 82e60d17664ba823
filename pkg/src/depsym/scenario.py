"""Scenario configuration and the end-to-end runner.

A scenario is one JSON document naming a Hamiltonian, an environment state,
and the checks to run on the resulting reduced dynamics. ``run`` evaluates
every check, compares it with the expected verdicts stored in the config and
writes ``report.json``, ``trajectories.csv``, ``forms.csv`` and ``scan.csv``.
"""
from __future__ import annotations

import csv
import functools
import json
import math
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .constants import constant_report, parse_direction_label, scan_constants
from .dynamics import (ReducedTrajectory, default_grid, jc_sigma3_oracle, leakage_check, qubit_coeffs,
                       reduce_grid, s_observable, trajectory)
from .hamiltonians import HamiltonianSpec, build, space_of
from .model import env_state, pauli
from .symmetry import (ACCEPT_TOL, REJECT_TOL, UnitarySpec, check_symmetry, form_violation_series,
                       get_template)

Verdict = Literal["holds", "broken", "inconclusive"]
Classification = Literal["none_constant", "all_constant", "some_constant", "inconclusive"]


class ConfigError(ValueError):
    pass


def _as_value_error(fn):
    """Let lookup failures surface as pydantic validation errors."""
    @functools.wraps(fn)
    def wrapped(*a, **kw):
        try:
            return fn(*a, **kw)
        except (KeyError, TypeError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            raise ValueError(msg) from None
    return wrapped


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HamiltonianConfig(_Strict):
    family: str
    params: dict[str, float]

    @model_validator(mode="after")
    @_as_value_error
    def _resolves(self):
        HamiltonianSpec(self.family, dict(self.params))
        return self

    def spec(self) -> HamiltonianSpec:
        return HamiltonianSpec(self.family, dict(self.params))


class EnvConfig(_Strict):
    kind: str
    params: dict[str, Any] = Field(default_factory=dict)


class UnitaryConfig(_Strict):
    kind: str
    params: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    @_as_value_error
    def _resolves(self):
        self.spec()
        return self

    def spec(self) -> UnitarySpec:
        return UnitarySpec(self.kind, dict(self.params))


class GridConfig(_Strict):
    t_max: float | None = Field(default=None, gt=0)
    points: int = Field(default=101, ge=1)


class Tolerances(_Strict):
    accept: float = Field(default=ACCEPT_TOL, gt=0)
    reject: float = Field(default=REJECT_TOL, gt=0)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.accept < self.reject:
            raise ValueError(f"accept tolerance {self.accept} must be below reject tolerance {self.reject}")
        return self


class Claim(_Strict):
    """An externally asserted property to adjudicate (reported, never gating)."""

    kind: Literal["constant"]
    observable: str
    asserted: bool
    note: str = ""


class Expected(_Strict):
    symmetries: list[Verdict | None] | None = None
    templates: dict[str, bool] = Field(default_factory=dict)
    classification: Classification | None = None
    scan_contains: list[list[float]] = Field(default_factory=list)
    constants: dict[str, bool] = Field(default_factory=dict)
    leakage_below: float | None = None


class ScenarioConfig(_Strict):
    name: str = "custom"
    description: str = ""
    hamiltonian: HamiltonianConfig
    env_state: EnvConfig
    observables: list[str] | None = None
    unitaries: list[UnitaryConfig] = Field(default_factory=list)
    templates: list[str] = Field(default_factory=list)
    t_grid: GridConfig = Field(default_factory=GridConfig)
    constants_scan: bool = False
    constant_observables: list[str] = Field(default_factory=list)
    claims: list[Claim] = Field(default_factory=list)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    cutoff_bump: int = Field(default=0, ge=0)
    fit_levels: int | None = Field(default=None, ge=2)
    expected: Expected = Field(default_factory=Expected)

    @field_validator("templates")
    @classmethod
    @_as_value_error
    def _templates_resolve(cls, v):
        for name in v:
            get_template(name)
        return v

    @field_validator("constant_observables")
    @classmethod
    def _constants_resolve(cls, v):
        for label in v:
            parse_direction_label(label)
        return v

    @model_validator(mode="after")
    @_as_value_error
    def _consistent(self):
        hspec = self.hamiltonian.spec()
        space = space_of(hspec)
        kind = space.s_factor().kind
        env_state(self.env_state.kind, space, **self.env_state.params)
        for label in self.observable_labels:
            s_observable(label, space)
        for name in self.templates:
            tpl = get_template(name)
            if tpl.kind != kind:
                raise ValueError(f"template {name} does not apply to a {kind} system")
            needed = {o for con in tpl.constraints for (o, _), _ in con}
            if tpl.frame is not None:
                needed |= {"S1", "S2", "S3"}
            missing = needed - set(self.observable_labels)
            if missing:
                raise ValueError(f"template {name} needs observables {sorted(missing)}")
        if (self.constants_scan or self.constant_observables or self.claims) and kind != "qubit":
            raise ValueError("constant checks need a qubit system")
        for c in self.claims:
            parse_direction_label(c.observable)
        if self.cutoff_bump and hspec.cutoff is None:
            raise ValueError(f"cutoff_bump given but {hspec.family} has no oscillator cutoff")
        if self.fit_levels is not None and kind == "osc" and self.fit_levels > space.s_dim:
            raise ValueError(f"fit_levels {self.fit_levels} exceeds the S dimension {space.s_dim}")
        e = self.expected
        if e.symmetries is not None and len(e.symmetries) != len(self.unitaries):
            raise ValueError("expected.symmetries must list one verdict per unitary")
        for name in e.templates:
            if name not in self.templates:
                raise ValueError(f"expected template {name} is not among the templates to check")
        for label in e.constants:
            if label not in self.constant_observables:
                raise ValueError(f"expected constant {label} is not among constant_observables")
        if (e.classification or e.scan_contains) and not self.constants_scan:
            raise ValueError("scan expectations need constants_scan = true")
        if e.leakage_below is not None and not self.cutoff_bump:
            raise ValueError("expected.leakage_below needs cutoff_bump > 0")
        return self

    @property
    def observable_labels(self) -> list[str]:
        if self.observables is not None:
            return list(self.observables)
        kind = space_of(self.hamiltonian.spec()).s_factor().kind
        return ["S1", "S2", "S3"] if kind == "qubit" else ["A"]

    def with_overrides(self, **kw) -> "ScenarioConfig":
        """Copy with CLI-style overrides (accept, reject, cutoff_bump, points); revalidated."""
        d = self.model_dump()
        if kw.get("accept") is not None:
            d["tolerances"]["accept"] = kw["accept"]
        if kw.get("reject") is not None:
            d["tolerances"]["reject"] = kw["reject"]
        if kw.get("cutoff_bump") is not None:
            d["cutoff_bump"] = kw["cutoff_bump"]
        if kw.get("points") is not None:
            d["t_grid"]["points"] = kw["points"]
        return ScenarioConfig.model_validate(d)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


def _line_of(text: str, loc: tuple) -> int | None:
    """Best-effort line number of the innermost named key of a validation error."""
    keys = [k for k in loc if isinstance(k, str)]
    pos = 0
    for k in keys:
        m = re.compile(r'"%s"\s*:' % re.escape(k)).search(text, pos)
        if m is None:
            break
        pos = m.start()
    else:
        return text.count("\n", 0, pos) + 1 if keys else None
    return text.count("\n", 0, pos) + 1 if pos else None


def parse_config(text: str) -> ScenarioConfig:
    """Parse a JSON scenario, raising ConfigError with line diagnostics."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            where = ".".join(str(x) for x in err["loc"]) or "<root>"
            line = _line_of(text, err["loc"])
            prefix = f"line {line}: " if line else ""
            msgs.append(f"{prefix}{where}: {err['msg']}")
        raise ConfigError("\n".join(msgs)) from None


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


# -- running ------------------------------------------------------------------

@dataclass
class RunResult:
    config: ScenarioConfig
    report: dict
    trajectory: ReducedTrajectory
    form_series: dict[str, np.ndarray] = field(default_factory=dict)
    scan: Any = None

    @property
    def passed(self) -> bool:
        return self.report["status"] == "pass"

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(self.report, indent=2, allow_nan=True) + "\n")
        with open(out / "trajectories.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "observable", "component", "re", "im"])
            w.writerows(self.trajectory.rows())
        with open(out / "forms.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "template", "violation"])
            for name, series in self.form_series.items():
                w.writerows((float(t), name, float(v)) for t, v in zip(self.trajectory.times, series))
        with open(out / "scan.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n1", "n2", "n3", "max_defect", "verdict"])
            if self.scan is not None:
                w.writerows(self.scan.rows())
        return out


class _Checks:
    def __init__(self):
        self.items: list[dict] = []

    def add(self, name, expected, observed, passed):
        self.items.append({"check": name, "expected": expected, "observed": observed, "passed": bool(passed)})

    def error(self, name, exc):
        self.items.append({"check": name, "error": f"{type(exc).__name__}: {exc}", "passed": False})


def _jc_claim_oracle(cfg: ScenarioConfig, traj_times, h, rho_r, q) -> dict | None:
    """Two-level prediction for Σ3 under Jaynes-Cummings with a Fock environment."""
    hs = cfg.hamiltonian.spec()
    if hs.family != "jaynes_cummings" or cfg.env_state.kind != "fock":
        return None
    if np.linalg.norm(q - pauli(3)) > 1e-15:
        return None
    n = int(cfg.env_state.params.get("n", 0))
    d, c = jc_sigma3_oracle(hs.params["omega"], n, traj_times)
    red = reduce_grid(h, rho_r, {"S3": pauli(3)}, traj_times)["S3"]
    num = [qubit_coeffs(m) for m in red]
    c_num = np.array([x["S3"].real for x in num])
    d_num = np.array([x["I"].real for x in num])
    oracle_defect = math.sqrt(2) * np.sqrt((c - 1) ** 2 + d ** 2)
    return {
        "oracle": "two-level restriction of the Fock-sector dynamics",
        "c_oracle": c.tolist(),
        "d_oracle": d.tolist(),
        "c_numeric": c_num.tolist(),
        "d_numeric": d_num.tolist(),
        "oracle_defect_trajectory": oracle_defect.tolist(),
        "max_coefficient_gap": float(max(np.max(np.abs(c - c_num)), np.max(np.abs(d - d_num)))),
    }


def run(cfg: ScenarioConfig, out_dir=None) -> RunResult:
    """Evaluate every check of the scenario; numeric failures are recorded per check."""
    started = time.perf_counter()
    hspec = cfg.hamiltonian.spec()
    h = build(hspec)
    space = h.space
    rho_r = env_state(cfg.env_state.kind, space, **cfg.env_state.params)
    grid = default_grid(hspec, cfg.t_grid.points, cfg.t_grid.t_max)
    acc, rej = cfg.tolerances.accept, cfg.tolerances.reject
    exp = cfg.expected
    checks = _Checks()

    traj = trajectory(h, rho_r, cfg.observable_labels, grid, cfg.fit_levels)
    report: dict[str, Any] = {
        "scenario": cfg.name,
        "description": cfg.description,
        "config": cfg.model_dump(mode="json"),
        "space": {"dims": space.dims, "s_dim": space.s_dim, "r_dim": space.r_dim},
        "grid": {"t_min": float(grid[0]), "t_max": float(grid[-1]), "points": len(grid)},
    }
    if traj.residuals:
        report["fit"] = {"fit_levels": traj.fit_levels,
                         "max_residual": {k: float(np.max(v)) for k, v in traj.residuals.items()}}

    # form templates
    form_series, forms = {}, {}
    for name in cfg.templates:
        try:
            series = form_violation_series(traj, name)
            form_series[name] = series
            viol = float(np.max(series))
            forms[name] = {"max_violation": viol, "matched": viol < acc}
            if name in exp.templates:
                checks.add(f"template {name}", exp.templates[name], viol < acc, (viol < acc) == exp.templates[name])
        except Exception as exc:  # noqa: BLE001 - recorded, not fatal
            forms[name] = {"error": str(exc)}
            checks.error(f"template {name}", exc)
    report["templates"] = forms

    # symmetries
    syms = []
    for i, uc in enumerate(cfg.unitaries):
        try:
            rep = check_symmetry(h, rho_r, uc.spec(), None, grid, acc, rej)
            rep.matched_templates = {k: v["max_violation"] for k, v in forms.items()
                                     if v.get("matched")}
            syms.append(rep.to_dict())
            if exp.symmetries is not None and exp.symmetries[i] is not None:
                checks.add(f"symmetry[{i}] {uc.kind}", exp.symmetries[i], rep.verdict,
                           rep.verdict == exp.symmetries[i])
        except Exception as exc:  # noqa: BLE001
            syms.append({"unitary": uc.model_dump(mode="json"), "error": str(exc)})
            checks.error(f"symmetry[{i}] {uc.kind}", exc)
    report["symmetries"] = syms

    # constants
    consts = []
    for label in cfg.constant_observables:
        try:
            _, q = parse_direction_label(label)
            rep = constant_report(h, rho_r, q, grid, label, acc, rej)
            consts.append(rep.to_dict())
            if label in exp.constants:
                checks.add(f"constant {label}", exp.constants[label], rep.is_constant,
                           rep.is_constant == exp.constants[label])
        except Exception as exc:  # noqa: BLE001
            consts.append({"observable": label, "error": str(exc)})
            checks.error(f"constant {label}", exc)
    report["constants"] = consts

    claims = []
    for cl in cfg.claims:
        try:
            _, q = parse_direction_label(cl.observable)
            rep = constant_report(h, rho_r, q, grid, cl.observable, acc, rej)
            entry = {
                "claim": f"{cl.observable} is {'' if cl.asserted else 'not '}a constant of the motion",
                "note": cl.note,
                "computed_verdict": rep.verdict,
                "max_defect": rep.max_defect,
                "agrees": (rep.verdict == "holds") == cl.asserted if rep.verdict != "inconclusive" else None,
                "defect_trajectory": rep.defect_trajectory.tolist(),
                "times": grid.tolist(),
            }
            oracle = _jc_claim_oracle(cfg, grid, h, rho_r, q)
            if oracle is not None:
                entry.update(oracle)
            entry["statement"] = (
                "computed defect agrees with the claim" if entry["agrees"]
                else "computed defect disagrees with the claim" if entry["agrees"] is False
                else "computed defect is inconclusive at the configured tolerances")
            claims.append(entry)
        except Exception as exc:  # noqa: BLE001
            claims.append({"observable": cl.observable, "error": str(exc)})
            checks.error(f"claim {cl.observable}", exc)
    report["claims"] = claims

    # scan
    scan = None
    if cfg.constants_scan:
        try:
            extra = [uc.spec().generator_direction() for uc in cfg.unitaries]
            extra = [n for n in extra if n is not None]
            extra += [np.asarray(v, float) for v in exp.scan_contains]
            extra += _hamiltonian_axes(hspec)
            scan = scan_constants(h, rho_r, grid, acc, rej, extra_directions=extra)
            report["scan"] = scan.to_dict()
            if exp.classification is not None:
                checks.add("scan classification", exp.classification, scan.classification,
                           scan.classification == exp.classification)
            for v in exp.scan_contains:
                checks.add(f"scan contains {v}", True, scan.contains(v), scan.contains(v))
        except Exception as exc:  # noqa: BLE001
            report["scan"] = {"error": str(exc)}
            checks.error("scan", exc)

    # truncation leakage
    if cfg.cutoff_bump:
        try:
            leak = leakage_check(hspec, cfg.env_state.kind, cfg.env_state.params, cfg.observable_labels,
                                 grid, cfg.cutoff_bump, traj.fit_levels)
            report["leakage"] = leak.to_dict()
            if exp.leakage_below is not None:
                checks.add("leakage", f"< {exp.leakage_below:g}", leak.max_relative_shift,
                           leak.max_relative_shift < exp.leakage_below)
        except Exception as exc:  # noqa: BLE001
            report["leakage"] = {"error": str(exc)}
            checks.error("leakage", exc)

    report["checks"] = checks.items
    report["status"] = "pass" if all(c["passed"] for c in checks.items) else "fail"
    report["elapsed_s"] = round(time.perf_counter() - started, 3)
    result = RunResult(cfg, report, traj, form_series, scan)
    if out_dir is not None:
        result.write(out_dir)
    return result


def _hamiltonian_axes(hspec: HamiltonianSpec) -> list[np.ndarray]:
    """Bloch directions that appear explicitly in the qubit Hamiltonians."""
    p = hspec.params
    if hspec.family == "tilted":
        return [np.array([p["alpha"], p["gamma"], 0.0])] if p["alpha"] or p["gamma"] else []
    if hspec.family == "decoupler":
        return [np.array([0.0, 1.0, 0.0])]
    return []


def run_preset(name: str, out_dir=None, **overrides) -> RunResult:
    from .presets import get_preset

    cfg = get_preset(name)
    if overrides:
        cfg = cfg.with_overrides(**overrides)
    return run(cfg, out_dir)


__all__ = ["ScenarioConfig", "ConfigError", "RunResult", "parse_config", "load_config", "run", "run_preset"]
