"""Scenario files: JSON schema, validation with field-path messages, and
construction of the model/volatility/curve/grid objects they describe."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .function_space import WeightedCurve, read_curve_csv
from .grids import SolveGrid
from .levy_model import LevyModel, levy_model_from_dict
from .random_factor import ConstantVol, ExpAffineVol, TabulatedVol, Volatility


class ScenarioError(ValueError):
    """Schema violation; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.field_path = path
        super().__init__(f"{path}: {message}")


def _need(d: dict, key: str, path: str):
    if key not in d:
        raise ScenarioError(f"{path}.{key}", "missing required field")
    return d[key]


def _number(v, path: str, positive: bool = False) -> float:
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ScenarioError(path, f"expected a number, got {type(v).__name__}")
    if positive and v <= 0:
        raise ScenarioError(path, f"must be positive, got {v}")
    return float(v)


@dataclass(frozen=True)
class Scenario:
    raw: dict
    model: LevyModel
    vol: Volatility
    grid: SolveGrid
    gamma: float
    r0: WeightedCurve
    tol: float
    max_iter: int
    cap: float | None
    seed: int

    @property
    def scenario_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True).encode()
        ).hexdigest()[:16]


def _build_vol(d: dict, path: str) -> Volatility:
    kind = _need(d, "kind", path)
    try:
        if kind == "constant":
            return ConstantVol(_number(_need(d, "value", path), f"{path}.value", True))
        if kind == "exp_affine":
            return ExpAffineVol(
                c0=_number(_need(d, "c0", path), f"{path}.c0"),
                c1=_number(_need(d, "c1", path), f"{path}.c1"),
                beta=_number(_need(d, "beta", path), f"{path}.beta", True),
            )
        if kind == "tabulated":
            if "csv" in d:
                curve = read_curve_csv(d["csv"], gamma=1.0)
                return TabulatedVol(dx=curve.dx, values=curve.values)
            return TabulatedVol(
                dx=_number(_need(d, "dx", path), f"{path}.dx", True),
                values=np.asarray(_need(d, "values", path), dtype=float),
            )
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(path, str(exc)) from exc
    raise ScenarioError(f"{path}.kind", f"unknown volatility kind {kind!r}")


def _build_r0(d: dict, grid: SolveGrid, gamma: float, path: str) -> WeightedCurve:
    kind = _need(d, "kind", path)
    n = grid.n_w
    xs = grid.x_wide
    try:
        if kind == "flat":
            level = _number(_need(d, "level", path), f"{path}.level")
            return WeightedCurve(dx=grid.dt, values=np.full(n + 1, level), gamma=gamma)
        if kind == "exp_decay":
            beta = _number(_need(d, "beta", path), f"{path}.beta", True)
            scale = _number(d.get("scale", 1.0), f"{path}.scale")
            return WeightedCurve(dx=grid.dt, values=scale * np.exp(-beta * xs), gamma=gamma)
        if kind == "csv":
            curve = read_curve_csv(_need(d, "path", path), gamma=gamma)
            if abs(curve.dx - grid.dt) > 1e-12 * grid.dt:
                raise ScenarioError(f"{path}.path", f"curve dx={curve.dx} != grid dt={grid.dt}")
            if curve.values.size < n + 1:
                raise ScenarioError(
                    f"{path}.path",
                    f"curve too short: need {n + 1} nodes up to x_max + t_star",
                )
            return curve
    except ScenarioError:
        raise
    except (ValueError, TypeError, OSError) as exc:
        raise ScenarioError(path, str(exc)) from exc
    raise ScenarioError(f"{path}.kind", f"unknown r0 kind {kind!r}")


def load_scenario(source, overrides: dict | None = None) -> Scenario:
    """Parse and validate a scenario (dict, JSON string or file path).

    overrides: optional {seed, grid_dt, tol, max_iter, cap} from CLI flags;
    they are applied before the effective scenario is hashed.
    """
    if isinstance(source, dict):
        raw = json.loads(json.dumps(source))
    else:
        text = None
        s = str(source)
        if s.lstrip().startswith("{"):
            text = s
        else:
            try:
                with open(s) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ScenarioError("<file>", f"cannot read scenario: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError("<file>", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")

    overrides = overrides or {}
    if overrides.get("seed") is not None:
        raw["seed"] = int(overrides["seed"])
    if overrides.get("grid_dt") is not None:
        raw.setdefault("grid", {})["dt"] = float(overrides["grid_dt"])
    solver_raw = raw.setdefault("solver", {})
    for key in ("tol", "max_iter", "cap"):
        if overrides.get(key) is not None:
            solver_raw[key] = overrides[key]

    try:
        model = levy_model_from_dict(_need(raw, "levy_model", "<root>"))
    except ScenarioError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ScenarioError("levy_model", str(exc)) from exc

    vol = _build_vol(_need(raw, "volatility", "<root>"), "volatility")

    grid_d = _need(raw, "grid", "<root>")
    try:
        grid = SolveGrid(
            t_star=_number(_need(grid_d, "t_star", "grid"), "grid.t_star", True),
            dt=_number(_need(grid_d, "dt", "grid"), "grid.dt", True),
            x_max=_number(_need(grid_d, "x_max", "grid"), "grid.x_max", True),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("grid", str(exc)) from exc

    gamma = _number(raw.get("gamma", 1.0), "gamma", True)
    r0 = _build_r0(_need(raw, "r0", "<root>"), grid, gamma, "r0")

    tol = _number(solver_raw.get("tol", 1e-10), "solver.tol", True)
    max_iter = int(_number(solver_raw.get("max_iter", 200), "solver.max_iter", True))
    cap = solver_raw.get("cap")
    if cap is not None:
        cap = _number(cap, "solver.cap", True)
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioError("seed", f"expected an integer, got {seed!r}")

    return Scenario(
        raw=raw,
        model=model,
        vol=vol,
        grid=grid,
        gamma=gamma,
        r0=r0,
        tol=tol,
        max_iter=max_iter,
        cap=cap,
        seed=seed,
    )
