"""JSON run configuration.

A config is a single JSON object.  Unknown keys anywhere are errors: a typo
in a coefficient name would otherwise silently change the physics.

    {
      "coefficients": {"lambda1": 1, "lambda2": 1, "lambda3": 1, "lambda4": 1, "c0": 1},
      "strings": [[0.5, 0], [-0.5, 0]],
      "epsilon": 0.3,
      "grid": {"R": 8, "n": 257},
      "newton": {"tol": 1e-9, "max_iter": 30}
    }

``physical`` ({"m_W", "e_charge", "G", "c0"}) may replace ``coefficients``;
``epsilons`` (a list) may replace ``epsilon`` for sweeps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError
from .fields import Grid2D
from .params import Params, PhysicalPreset
from .solver import NewtonConfig

_TOP = {"coefficients", "physical", "strings", "epsilon", "epsilons", "a", "grid", "newton", "radial", "output"}
_COEFF = {"lambda1", "lambda2", "lambda3", "lambda4", "c0"}
_PHYS = {"m_W", "e_charge", "G", "c0"}
_GRID = {"R", "n", "box_growth"}
_NEWTON = {"tol", "max_iter"}
_RADIAL = {"r_max", "fit_window"}


@dataclass(frozen=True)
class RadialOptions:
    r_max: float = 1e5
    fit_window: tuple[float, float] = (1e3, 1e5)


@dataclass(frozen=True)
class RunConfig:
    params: Params
    epsilons: tuple[float, ...]
    grid: Grid2D | None = None
    box_growth: bool = False
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    radial: RadialOptions = field(default_factory=RadialOptions)
    output: Path | None = None
    physical: bool = False

    def at(self, epsilon: float) -> Params:
        return self.params.with_(epsilon=epsilon)


def _check_keys(block: dict, allowed: set, where: str, required: set = frozenset()) -> None:
    if not isinstance(block, dict):
        raise ConfigurationError(f"{where} must be a JSON object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigurationError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    missing = set(required) - set(block)
    if missing:
        raise ConfigurationError(f"missing key(s) in {where}: {', '.join(sorted(missing))}")


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be finite")
    return value


def _complex(value, name: str) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigurationError(f"{name} must be a number or an [x, y] pair")
        return complex(_number(value[0], name), _number(value[1], name))
    return complex(_number(value, name), 0.0)


def parse_config(data: dict, output: str | Path | None = None) -> RunConfig:
    """Validate a decoded JSON document and build a RunConfig."""
    _check_keys(data, _TOP, "config")
    if ("coefficients" in data) == ("physical" in data):
        raise ConfigurationError("exactly one of 'coefficients' and 'physical' must be given")
    if "epsilon" in data and "epsilons" in data:
        raise ConfigurationError("give either 'epsilon' or 'epsilons', not both")

    strings = tuple(_complex(s, "strings entry") for s in data.get("strings", []))
    if "epsilons" in data:
        if not isinstance(data["epsilons"], list) or not data["epsilons"]:
            raise ConfigurationError("epsilons must be a nonempty list")
        epsilons = tuple(_number(e, "epsilons entry") for e in data["epsilons"])
    else:
        epsilons = (_number(data.get("epsilon", 1.0), "epsilon"),)
    a = _complex(data.get("a", 0.0), "a")

    if "coefficients" in data:
        block = data["coefficients"]
        _check_keys(block, _COEFF, "coefficients", required=_COEFF - {"c0"})
        values = {k: _number(v, k) for k, v in block.items()}
        params = Params(strings=strings, epsilon=epsilons[0], a=a, **values)
    else:
        block = data["physical"]
        _check_keys(block, _PHYS, "physical", required=_PHYS - {"c0"})
        values = {k: _number(v, k) for k, v in block.items()}
        c0 = values.pop("c0", 1.0)
        params = PhysicalPreset(**values).params(c0=c0, strings=strings, epsilon=epsilons[0], a=a)
    for e in epsilons[1:]:
        params.with_(epsilon=e)  # validate every sweep entry

    grid, box_growth = None, False
    if "grid" in data:
        g = data["grid"]
        _check_keys(g, _GRID, "grid", required={"R", "n"})
        if isinstance(g["n"], bool) or not isinstance(g["n"], int):
            raise ConfigurationError("grid.n must be an integer")
        try:
            grid = Grid2D(_number(g["R"], "grid.R"), g["n"])
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        box_growth = bool(g.get("box_growth", False))

    newton = NewtonConfig()
    if "newton" in data:
        nb = data["newton"]
        _check_keys(nb, _NEWTON, "newton")
        kw = {}
        if "tol" in nb:
            kw["tol"] = _number(nb["tol"], "newton.tol")
        if "max_iter" in nb:
            if isinstance(nb["max_iter"], bool) or not isinstance(nb["max_iter"], int):
                raise ConfigurationError("newton.max_iter must be an integer")
            kw["max_iter"] = nb["max_iter"]
        newton = NewtonConfig(**kw)

    radial = RadialOptions()
    if "radial" in data:
        rb = data["radial"]
        _check_keys(rb, _RADIAL, "radial")
        kw = {}
        if "r_max" in rb:
            kw["r_max"] = _number(rb["r_max"], "radial.r_max")
        if "fit_window" in rb:
            fw = rb["fit_window"]
            if not isinstance(fw, list) or len(fw) != 2:
                raise ConfigurationError("radial.fit_window must be [r_lo, r_hi]")
            kw["fit_window"] = (_number(fw[0], "fit_window"), _number(fw[1], "fit_window"))
        radial = RadialOptions(**kw)

    out = output if output is not None else data.get("output")
    return RunConfig(
        params=params,
        epsilons=epsilons,
        grid=grid,
        box_growth=box_growth,
        newton=newton,
        radial=radial,
        output=Path(out) if out is not None else None,
        physical="physical" in data,
    )


def load_config(path: str | Path, output: str | Path | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data, output)
