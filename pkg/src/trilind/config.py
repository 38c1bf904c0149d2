"""Run configuration: parsing, validation and parameter resolution.

Configs are flat ``key = value`` text with dotted keys (``params.g = 40``).
``[section]`` headers prefix the keys that follow them.  JSON with the same
keys nested as objects is accepted too; a JSON list under ``sweep`` becomes
``sweep.1``, ``sweep.2``.

Parameter and variable values may be arithmetic expressions over other
parameters, ``vars.*`` entries, ``pi``, ``e`` and the functions ``sqrt``,
``exp``, ``log``, ``sin``, ``cos``, ``abs``.  They are resolved per sweep point,
so ``params.delta_c = -omega_b`` follows a swept ``omega_b``.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field
from importlib import resources
from itertools import product
from typing import Any, Optional, Union

import numpy as np

from .errors import ConfigError, ConfigTruncationError

MODELS = ("full", "beamsplitter", "squeeze")
TASKS = ("dynamics", "steady", "sweep", "wigner", "spectrum", "g2tau")
SWEEPABLE_TASKS = ("dynamics", "sweep", "g2tau")
TIME_UNITS = ("inv_gamma", "gt_over_pi")

RATE_PARAMS = ("gamma", "kappa_a", "kappa_b")
FULL_PARAMS = ("g", "omega_b", "delta_c", "delta_atom", "omega_pump") + RATE_PARAMS
RWA_PARAMS = ("delta_a", "delta_b", "delta", "g", "omega_pump") + RATE_PARAMS

DEFAULTS: dict[str, dict[str, Union[float, str]]] = {
    "full": {
        "g": 40.0,
        "omega_b": "10*g",
        "delta_c": "-omega_b",
        "delta_atom": 0.0,
        "omega_pump": 0.2,
        "gamma": 1.0,
        "kappa_a": 10.0,
        "kappa_b": 1.0,
    },
    "rwa": {
        "delta_a": 0.0,
        "delta_b": 0.0,
        "delta": 0.0,
        "g": 40.0,
        "omega_pump": 0.2,
        "gamma": 1.0,
        "kappa_a": 10.0,
        "kappa_b": 1.0,
    },
}

_SCALAR_KEYS: dict[str, Any] = {
    "model": None,
    "task": None,
    "output_dir": "out",
    "initial": "vacuum_excited",
    "initial.n_a": None,
    "initial.n_b": None,
    "initial.s": None,
    "truncation.n_a_max": 5,
    "truncation.n_b_max": 5,
    "truncation.n_max": None,
    "truncation.tail_tol": 1e-6,
    "truncation.tail_fail": 1e-3,
    "time.t_max": 1.0,
    "time.n_points": 101,
    "time.units": "gt_over_pi",
    "integrator.method": "dopri5",
    "integrator.rel_tol": 1e-8,
    "integrator.abs_tol": 1e-10,
    "integrator.max_step": math.inf,
    "integrator.fixed_step": None,
    "dissipation.kappa_b_operator": "phonon",
    "output.distributions": False,
    "wigner.source": "dynamics",
    "wigner.time": None,
    "wigner.x_max": 3.0,
    "wigner.n_points": 101,
    "g2tau.tau_max": None,
    "g2tau.n_points": 200,
    "g2tau.spacing": "log",
    "spectrum.n_max": 3,
    "spectrum.delta_min": None,
    "spectrum.delta_max": None,
    "spectrum.delta_points": 1,
}
_SWEEP_FIELDS = ("name", "min", "max", "points", "values", "scale")


# --------------------------------------------------------------------------
# expressions

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log, "sin": math.sin, "cos": math.cos, "abs": abs}
_CONSTS = {"pi": math.pi, "e": math.e}


def _names(node) -> set[str]:
    return {n.id for n in ast.walk(node) if isinstance(n, ast.Name)} - set(_FUNCS) - set(_CONSTS)


def _eval(node, env, key):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env, key)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id in _CONSTS:
            return _CONSTS[node.id]
        return env(node.id)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left, env, key), _eval(node.right, env, key))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval(node.operand, env, key))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return float(_FUNCS[node.func.id](_eval(node.args[0], env, key)))
    raise ConfigError(key, f"unsupported expression element {ast.dump(node)[:40]}")


def _parse_expr(text, key):
    if isinstance(text, bool):
        raise ConfigError(key, "expected a number or expression, got a boolean")
    if isinstance(text, (int, float)):
        return ast.Expression(ast.Constant(float(text)))
    try:
        return ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(key, f"cannot parse expression {text!r}") from exc


def evaluate(expr, variables: dict[str, float], key: str = "<expr>") -> float:
    """Evaluate a config expression against already-resolved values."""

    def env(name):
        if name not in variables:
            raise ConfigError(key, f"unknown name {name!r} in expression")
        return variables[name]

    try:
        return float(_eval(_parse_expr(expr, key), env, key))
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, f"cannot evaluate {expr!r}: {exc}") from exc


# --------------------------------------------------------------------------
# text formats


def parse_text(raw: str) -> dict[str, Any]:
    """Parse key-value text (or JSON, detected by a leading ``{``) into flat dotted keys."""
    stripped = raw.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError("<json>", f"invalid JSON: {exc}") from exc
        return _flatten(data)
    out: dict[str, Any] = {}
    section = ""
    for lineno, line in enumerate(raw.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}", "empty key")
        full = f"{section}.{key}" if section else key
        if full in out:
            raise ConfigError(full, "duplicate key")
        out[full] = value
    return out


def _flatten(data, prefix=""):
    out = {}
    if isinstance(data, dict):
        for k, v in data.items():
            out.update(_flatten(v, f"{prefix}{k}."))
        return out
    if isinstance(data, list) and prefix.endswith("sweep."):
        for i, item in enumerate(data, 1):
            out.update(_flatten(item, f"{prefix}{i}."))
        return out
    out[prefix[:-1]] = data
    return out


def _as_int(value, key, minimum=None):
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected an integer, got {value!r}") from None
    if not f.is_integer():
        raise ConfigError(key, f"expected an integer, got {value!r}")
    i = int(f)
    if minimum is not None and i < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {i}")
    return i


def _as_float(value, key, minimum=None, positive=False):
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {value!r}") from None
    if math.isnan(f):
        raise ConfigError(key, "must not be NaN")
    if positive and not f > 0:
        raise ConfigError(key, f"must be > 0, got {f}")
    if minimum is not None and f < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {f}")
    return f


def _as_bool(value, key):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "yes", "1", "on"):
        return True
    if text in ("false", "no", "0", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {value!r}")


def _choice(value, key, options):
    text = str(value).strip()
    if text not in options:
        raise ConfigError(key, f"must be one of {', '.join(options)}; got {text!r}")
    return text


# --------------------------------------------------------------------------
# config object


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]
    spec: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class RunConfig:
    model: str
    task: str
    params: dict
    variables: dict
    n_a_max: int
    n_b_max: int
    tail_tol: float
    tail_fail: float
    initial: tuple
    t_max: float
    n_points: int
    time_units: str
    integrator: dict
    sweep: tuple
    output_dir: str
    distributions: bool
    kappa_b_operator: str
    wigner: dict
    g2tau: dict
    spectrum: dict
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def param_names(self) -> tuple[str, ...]:
        return FULL_PARAMS if self.model == "full" else RWA_PARAMS

    def points(self) -> list[dict[str, float]]:
        """Sweep overrides in row-major order (first axis slowest); one empty dict without a sweep."""
        if not self.sweep:
            return [{}]
        names = [ax.name for ax in self.sweep]
        return [dict(zip(names, combo)) for combo in product(*(ax.values for ax in self.sweep))]

    def resolve(self, overrides: Optional[dict[str, float]] = None) -> dict[str, float]:
        """Numeric parameters (and variables) at one sweep point."""
        overrides = dict(overrides or {})
        exprs = {**{f"vars.{k}": v for k, v in self.variables.items()}, **{f"params.{k}": v for k, v in self.params.items()}}
        short = {k.split(".", 1)[1]: k for k in exprs}
        done: dict[str, float] = {}
        active: list[str] = []

        def get(name):
            if name in overrides:
                return float(overrides[name])
            if name in done:
                return done[name]
            if name not in short:
                raise ConfigError(short[active[-1]] if active else name, f"unknown name {name!r} in expression")
            key = short[name]
            if name in active:
                raise ConfigError(key, f"circular reference through {' -> '.join(active + [name])}")
            active.append(name)
            node = _parse_expr(exprs[key], key)
            try:
                value = float(_eval(node, get, key))
            except (ZeroDivisionError, OverflowError, ValueError) as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(key, f"cannot evaluate {exprs[key]!r}: {exc}") from exc
            active.pop()
            if not math.isfinite(value):
                raise ConfigError(key, f"evaluates to non-finite value {value}")
            done[name] = value
            return value

        values = {name: get(name) for name in short}
        for name in RATE_PARAMS + ("g",):
            if values.get(name, 0.0) < 0:
                raise ConfigError(f"params.{name}", f"must be >= 0, got {values[name]}")
        return values

    def to_inv_gamma(self, t: float, values: dict[str, float]) -> float:
        if self.time_units == "inv_gamma":
            return t
        g = values["g"]
        if g <= 0:
            raise ConfigError("time.units", "gt_over_pi requires g > 0")
        return t * math.pi / g

    def time_grid(self, values: dict[str, float]) -> np.ndarray:
        return np.linspace(0.0, self.to_inv_gamma(self.t_max, values), self.n_points)

    def echo(self) -> dict[str, Any]:
        """Complete effective configuration with defaults filled in."""
        base = self.resolve(self.points()[0]) if self.sweep else self.resolve()
        return {
            "model": self.model,
            "task": self.task,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "vars": {k: _jsonable(v) for k, v in self.variables.items()},
            "resolved_base_point": base,
            "truncation": {
                "n_a_max": self.n_a_max,
                "n_b_max": self.n_b_max,
                "tail_tol": self.tail_tol,
                "tail_fail": self.tail_fail,
            },
            "initial": list(self.initial),
            "time": {"t_max": self.t_max, "n_points": self.n_points, "units": self.time_units},
            "integrator": {k: _jsonable(v) for k, v in self.integrator.items()},
            "sweep": [{"name": ax.name, "values": list(ax.values), **ax.spec} for ax in self.sweep],
            "output_dir": self.output_dir,
            "output": {"distributions": self.distributions},
            "dissipation": {"kappa_b_operator": self.kappa_b_operator},
            "wigner": {k: _jsonable(v) for k, v in self.wigner.items()},
            "g2tau": {k: _jsonable(v) for k, v in self.g2tau.items()},
            "spectrum": {k: _jsonable(v) for k, v in self.spectrum.items()},
        }


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _sweep_axis(index: str, fields: dict[str, Any], allowed: set[str]) -> SweepAxis:
    prefix = f"sweep.{index}"
    if "name" not in fields:
        raise ConfigError(f"{prefix}.name", "missing required key")
    name = str(fields["name"]).strip()
    if name not in allowed:
        raise ConfigError(f"{prefix}.name", f"unknown parameter {name!r}; sweepable names: {', '.join(sorted(allowed))}")
    scale = _choice(fields.get("scale", "linear"), f"{prefix}.scale", ("linear", "log"))
    if "values" in fields:
        if any(k in fields for k in ("min", "max", "points")):
            raise ConfigError(f"{prefix}.values", "give either values or min/max/points, not both")
        raw = fields["values"]
        items = raw if isinstance(raw, list) else [x for x in str(raw).split(",") if x.strip()]
        values = tuple(evaluate(x, {}, f"{prefix}.values") for x in items)
        if not values:
            raise ConfigError(f"{prefix}.values", "empty value list")
        spec = {"values_given": True}
    else:
        for k in ("min", "max", "points"):
            if k not in fields:
                raise ConfigError(f"{prefix}.{k}", "missing required key")
        lo = evaluate(fields["min"], {}, f"{prefix}.min") if not _needs_env(fields["min"]) else None
        hi = evaluate(fields["max"], {}, f"{prefix}.max") if not _needs_env(fields["max"]) else None
        if lo is None or hi is None:
            raise ConfigError(f"{prefix}.min", "sweep bounds must be numeric (constants and pi allowed)")
        points = _as_int(fields["points"], f"{prefix}.points", minimum=1)
        if points == 1 and lo != hi:
            raise ConfigError(f"{prefix}.points", "a single-point axis needs min == max")
        if scale == "log":
            if lo <= 0 or hi <= 0:
                raise ConfigError(f"{prefix}.min", "log-scaled sweep bounds must be > 0")
            values = tuple(float(x) for x in np.geomspace(lo, hi, points))
        else:
            values = tuple(float(x) for x in np.linspace(lo, hi, points))
        spec = {"min": lo, "max": hi, "points": points, "scale": scale}
    return SweepAxis(name, values, spec)


def _needs_env(expr) -> bool:
    if isinstance(expr, (int, float)):
        return False
    try:
        return bool(_names(ast.parse(str(expr).strip(), mode="eval")))
    except SyntaxError:
        return False


def validate_config(raw: Union[str, dict[str, Any]]) -> RunConfig:
    """Parse and validate a config; every unknown key is an error."""
    flat = parse_text(raw) if isinstance(raw, str) else dict(raw)

    scalars: dict[str, Any] = {}
    params: dict[str, Any] = {}
    variables: dict[str, Any] = {}
    sweeps: dict[str, dict[str, Any]] = {}
    for key, value in flat.items():
        if key in _SCALAR_KEYS:
            scalars[key] = value
        elif key.startswith("params."):
            params[key[len("params."):]] = value
        elif key.startswith("vars."):
            name = key[len("vars."):]
            if not name.isidentifier():
                raise ConfigError(key, "variable names must be identifiers")
            variables[name] = value
        elif key.startswith("sweep."):
            parts = key.split(".")
            if len(parts) != 3 or parts[2] not in _SWEEP_FIELDS:
                raise ConfigError(key, "unknown key")
            sweeps.setdefault(parts[1], {})[parts[2]] = value
        else:
            raise ConfigError(key, "unknown key")

    def get(key):
        return scalars.get(key, _SCALAR_KEYS[key])

    for key in ("model", "task"):
        if get(key) is None:
            raise ConfigError(key, "missing required key")
    model = _choice(get("model"), "model", MODELS)
    task = _choice(get("task"), "task", TASKS)

    names = FULL_PARAMS if model == "full" else RWA_PARAMS
    for name in params:
        if name not in names:
            raise ConfigError(f"params.{name}", f"unknown parameter for model {model!r}; expected one of {', '.join(names)}")
    clash = set(variables) & set(names)
    if clash:
        raise ConfigError(f"vars.{sorted(clash)[0]}", "variable shadows a model parameter")
    defaults = DEFAULTS["full" if model == "full" else "rwa"]
    merged_params = {**defaults, **params}
    for key, value in list(merged_params.items()) + [(f"vars.{k}", v) for k, v in variables.items()]:
        label = key if key.startswith("vars.") else f"params.{key}"
        _parse_expr(value, label)

    n_max = get("truncation.n_max")
    if n_max is not None:
        if "truncation.n_a_max" in scalars or "truncation.n_b_max" in scalars:
            raise ConfigError("truncation.n_max", "give n_max or n_a_max/n_b_max, not both")
        n_a_max = n_b_max = n_max
    else:
        n_a_max, n_b_max = get("truncation.n_a_max"), get("truncation.n_b_max")
    truncation = {}
    for key, value in (("truncation.n_a_max", n_a_max), ("truncation.n_b_max", n_b_max)):
        i = _as_int(value, key)
        if i < 1:
            raise ConfigTruncationError(key, f"invalid truncation: must be >= 1, got {i}")
        truncation[key] = i
    tail_tol = _as_float(get("truncation.tail_tol"), "truncation.tail_tol", positive=True)
    tail_fail = _as_float(get("truncation.tail_fail"), "truncation.tail_fail", positive=True)
    if tail_fail < tail_tol:
        raise ConfigError("truncation.tail_fail", "must be >= truncation.tail_tol")

    initial = _initial(scalars, truncation["truncation.n_a_max"], truncation["truncation.n_b_max"])

    t_max = _as_float(get("time.t_max"), "time.t_max", positive=True)
    n_points = _as_int(get("time.n_points"), "time.n_points", minimum=2)
    units = _choice(get("time.units"), "time.units", TIME_UNITS)

    method = _choice(get("integrator.method"), "integrator.method", ("dopri5", "rk4"))
    integrator = {
        "method": method,
        "rel_tol": _as_float(get("integrator.rel_tol"), "integrator.rel_tol", positive=True),
        "abs_tol": _as_float(get("integrator.abs_tol"), "integrator.abs_tol", positive=True),
        "max_step": _as_float(get("integrator.max_step"), "integrator.max_step", positive=True),
        "fixed_step": None,
    }
    if get("integrator.fixed_step") is not None:
        integrator["fixed_step"] = _as_float(get("integrator.fixed_step"), "integrator.fixed_step", positive=True)
    if method == "rk4" and integrator["fixed_step"] is None:
        raise ConfigError("integrator.fixed_step", "missing required key for method rk4")

    allowed = set(names) | set(variables)
    axes = []
    for index in sorted(sweeps, key=lambda s: (len(s), s)):
        if index not in ("1", "2"):
            raise ConfigError(f"sweep.{index}", "sweep axes are numbered 1 and 2")
        axes.append(_sweep_axis(index, sweeps[index], allowed))
    if len({ax.name for ax in axes}) != len(axes):
        raise ConfigError("sweep.2.name", "both sweep axes name the same parameter")
    if task == "sweep" and not axes:
        raise ConfigError("sweep.1.name", "missing required key for task sweep")
    if axes and task not in SWEEPABLE_TASKS:
        raise ConfigError("sweep.1", f"task {task!r} does not take a sweep")

    source = _choice(get("wigner.source"), "wigner.source", ("dynamics", "steady"))
    wigner = {
        "source": source,
        "time": None if get("wigner.time") is None else _as_float(get("wigner.time"), "wigner.time", minimum=0.0),
        "x_max": _as_float(get("wigner.x_max"), "wigner.x_max", positive=True),
        "n_points": _as_int(get("wigner.n_points"), "wigner.n_points", minimum=2),
    }
    if task == "wigner" and source == "dynamics" and wigner["time"] is None:
        raise ConfigError("wigner.time", "missing snapshot time for wigner.source = dynamics")

    g2tau = {
        "tau_max": None if get("g2tau.tau_max") is None else _as_float(get("g2tau.tau_max"), "g2tau.tau_max", positive=True),
        "n_points": _as_int(get("g2tau.n_points"), "g2tau.n_points", minimum=2),
        "spacing": _choice(get("g2tau.spacing"), "g2tau.spacing", ("log", "linear")),
    }

    spectrum = {
        "n_max": _as_int(get("spectrum.n_max"), "spectrum.n_max", minimum=1),
        "delta_min": get("spectrum.delta_min"),
        "delta_max": get("spectrum.delta_max"),
        "delta_points": _as_int(get("spectrum.delta_points"), "spectrum.delta_points", minimum=1),
    }
    if task == "spectrum" and model != "squeeze":
        raise ConfigError("model", "task spectrum applies to the squeeze model")

    cfg = RunConfig(
        model=model,
        task=task,
        params=merged_params,
        variables=variables,
        n_a_max=truncation["truncation.n_a_max"],
        n_b_max=truncation["truncation.n_b_max"],
        tail_tol=tail_tol,
        tail_fail=tail_fail,
        initial=initial,
        t_max=t_max,
        n_points=n_points,
        time_units=units,
        integrator=integrator,
        sweep=tuple(axes),
        output_dir=str(get("output_dir")),
        distributions=_as_bool(get("output.distributions"), "output.distributions"),
        kappa_b_operator=_choice(get("dissipation.kappa_b_operator"), "dissipation.kappa_b_operator", ("phonon", "cavity")),
        wigner=wigner,
        g2tau=g2tau,
        spectrum=spectrum,
        raw=flat,
    )
    # Resolve every grid corner so bad expressions and negative rates fail here.
    for point in _corners(cfg):
        cfg.resolve(point)
    return cfg


def _corners(cfg):
    if not cfg.sweep:
        return [{}]
    names = [ax.name for ax in cfg.sweep]
    ends = [sorted({ax.values[0], ax.values[-1], min(ax.values), max(ax.values)}) for ax in cfg.sweep]
    return [dict(zip(names, combo)) for combo in product(*ends)]


def _initial(scalars, n_a_max, n_b_max):
    explicit = {k: scalars[k] for k in ("initial.n_a", "initial.n_b", "initial.s") if k in scalars}
    label = scalars.get("initial", "vacuum_excited")
    if explicit:
        if "initial" in scalars:
            raise ConfigError("initial", "give either initial or initial.n_a/n_b/s, not both")
        missing = [k for k in ("initial.n_a", "initial.n_b", "initial.s") if k not in explicit]
        if missing:
            raise ConfigError(missing[0], "missing required key")
        n_a = _as_int(explicit["initial.n_a"], "initial.n_a", minimum=0)
        n_b = _as_int(explicit["initial.n_b"], "initial.n_b", minimum=0)
        s = _choice(explicit["initial.s"], "initial.s", ("g", "e"))
    elif str(label).strip() == "vacuum_excited":
        n_a, n_b, s = 0, 0, "e"
    else:
        parts = [p.strip() for p in str(label).split(",")]
        if len(parts) != 3:
            raise ConfigError("initial", "expected vacuum_excited or 'n_a, n_b, s'")
        n_a = _as_int(parts[0], "initial", minimum=0)
        n_b = _as_int(parts[1], "initial", minimum=0)
        s = _choice(parts[2], "initial", ("g", "e"))
    if n_a > n_a_max:
        raise ConfigError("initial.n_a", f"cavity level {n_a} above truncation {n_a_max}")
    if n_b > n_b_max:
        raise ConfigError("initial.n_b", f"phonon level {n_b} above truncation {n_b_max}")
    return (n_a, n_b, s)


# --------------------------------------------------------------------------
# presets


def preset_names() -> dict[str, str]:
    """Map every preset name and alias to its file name."""
    table = {}
    for entry in resources.files("trilind.presets").iterdir():
        if not entry.name.endswith(".cfg"):
            continue
        stem = entry.name[:-4]
        table[stem] = entry.name
        for line in entry.read_text().splitlines():
            if line.startswith("# aliases:"):
                for alias in line.split(":", 1)[1].split():
                    table.setdefault(alias, entry.name)
    return table


def load_preset(name: str) -> str:
    table = preset_names()
    if name not in table:
        raise ConfigError("--preset", f"unknown preset {name!r}; available: {', '.join(sorted(table))}")
    return resources.files("trilind.presets").joinpath(table[name]).read_text()


def merge_sources(*texts: Optional[str]) -> dict[str, Any]:
    """Parse several config texts; later ones override earlier keys."""
    merged: dict[str, Any] = {}
    for text in texts:
        if text:
            merged.update(parse_text(text))
    return merged
