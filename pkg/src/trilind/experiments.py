"""Task runners: solve each grid point, then write CSV files and metadata.json.

Each grid point is an independent job.  With ``jobs > 1`` points are farmed
out to a process pool and the results are merged back in grid order, so the
CSV bytes do not depend on the schedule.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels
from .config import RunConfig, evaluate
from .errors import IntegrationError, SolverError, TrilindError, UndefinedCorrelationError
from .fock import DensityMatrix, HilbertSpace, basis_state, partial_trace, truncation_tails
from .lindblad import CollapseSet, EvolutionSpec, build_liouvillian, evolve, steady_state
from .model import (
    EffectiveParams,
    SystemParams,
    build_beamsplitter_hamiltonian,
    build_full_hamiltonian,
    build_squeeze_hamiltonian,
    resonance_detunings,
    squeeze_spectrum,
)
from .observables import (
    default_tau_grid,
    g2_tau,
    g2_zero,
    moments,
    number_distribution,
    steady_distribution,
    wigner,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILED = 2
EXIT_PARTIAL = 3
FAILURE_FRACTION = 0.10

DYNAMICS_COLUMNS = ("t", "n_a", "n_b", "spin_exc", "n_e", "g2_aa_0", "g2_bb_0")
DIST_COLUMNS = ("t", "mode", "q", "p")
STEADY_COLUMNS = ("n_a_ss", "n_b_ss", "g2_aa_0", "g2_bb_0", "tail_a", "tail_b", "converged")
STEADY_DIST_COLUMNS = ("mode", "q", "p", "p_tilde")
WIGNER_COLUMNS = ("re_alpha", "im_alpha", "w")
SPECTRUM_COLUMNS = ("n", "delta", "e_plus", "e_minus", "delta_a_plus", "delta_a_minus")
G2TAU_COLUMNS = ("tau", "g2_aa", "g2_bb")


# --------------------------------------------------------------------------
# problem assembly


def build_space_for(cfg: RunConfig) -> HilbertSpace:
    return HilbertSpace(cfg.n_a_max, cfg.n_b_max)


def build_hamiltonian(cfg: RunConfig, values: dict[str, float], space: HilbertSpace):
    if cfg.model == "full":
        p = SystemParams(**{k: values[k] for k in ("g", "omega_b", "delta_c", "delta_atom", "omega_pump", "gamma", "kappa_a", "kappa_b")})
        return build_full_hamiltonian(p, space)
    p = EffectiveParams(**{k: values[k] for k in ("delta_a", "delta_b", "delta", "g", "omega_pump")})
    if cfg.model == "beamsplitter":
        return build_beamsplitter_hamiltonian(p, space)
    return build_squeeze_hamiltonian(p, space)


def build_problem(cfg: RunConfig, values: dict[str, float]):
    """``(space, liouvillian)`` at one resolved parameter point."""
    space = build_space_for(cfg)
    h = build_hamiltonian(cfg, values, space)
    c = CollapseSet.default(
        space,
        values["gamma"],
        values["kappa_a"],
        values["kappa_b"],
        kappa_b_on_cavity=cfg.kappa_b_operator == "cavity",
    )
    return space, build_liouvillian(h, c)


def initial_state(cfg: RunConfig, space: HilbertSpace) -> DensityMatrix:
    return DensityMatrix.from_state(basis_state(space, *cfg.initial))


def _evolution_spec(cfg: RunConfig, t_grid) -> EvolutionSpec:
    ig = cfg.integrator
    return EvolutionSpec(
        t_grid,
        rel_tol=ig["rel_tol"],
        abs_tol=ig["abs_tol"],
        max_step=ig["max_step"],
        method=ig["method"],
        fixed_step=ig["fixed_step"],
    )


def _g2_or_none(rho, mode) -> Optional[float]:
    try:
        return g2_zero(rho, mode)
    except UndefinedCorrelationError:
        return None


# --------------------------------------------------------------------------
# per-point solvers (top level so they pickle for the process pool)


@dataclass
class PointResult:
    overrides: dict
    values: dict
    rows: list = field(default_factory=list)
    extra_rows: list = field(default_factory=list)
    converged: bool = True
    stats: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    errors: list = field(default_factory=list)


def _tail_notes(result: PointResult, cfg: RunConfig, tails) -> bool:
    """Record tail warnings; return False when a tail exceeds the hard limit."""
    ok = True
    for label, tail in zip(("cavity", "phonon"), tails):
        if tail > cfg.tail_fail:
            result.errors.append(f"{label} tail population {tail:.3e} exceeds {cfg.tail_fail:.0e}; increase truncation")
            ok = False
        elif tail > cfg.tail_tol:
            result.warnings.append(f"{label} tail population {tail:.3e} exceeds {cfg.tail_tol:.0e}")
    return ok


def _solve_dynamics(cfg: RunConfig, overrides: dict) -> PointResult:
    values = cfg.resolve(overrides)
    res = PointResult(overrides, values)
    space, l = build_problem(cfg, values)
    t_out = np.linspace(0.0, cfg.t_max, cfg.n_points)
    t_grid = cfg.time_grid(values)
    counter = iter(t_out)

    def observe(t, rho):
        m = moments(rho)
        label = float(next(counter))
        res.rows.append((label, m.n_a, m.n_b, m.spin_exc, m.n_e, _g2_or_none(rho, "cavity"), _g2_or_none(rho, "phonon")))
        if cfg.distributions:
            for mode in ("cavity", "phonon"):
                for q, p in enumerate(number_distribution(rho, mode).p):
                    res.extra_rows.append((label, mode, q, float(p)))

    try:
        traj = evolve(initial_state(cfg, space), l, _evolution_spec(cfg, t_grid), observe=observe, store_states=False)
    except IntegrationError as exc:
        res.converged = False
        res.errors.append(str(exc))
        return res
    res.stats = {
        "steps": traj.n_steps,
        "rejected_steps": traj.n_rejected,
        "max_trace_drift": traj.max_trace_drift,
        "min_eigenvalue": traj.min_eigenvalue,
        "tail_a": traj.max_tails[0],
        "tail_b": traj.max_tails[1],
    }
    res.converged = _tail_notes(res, cfg, traj.max_tails)
    return res


def _steady(cfg, values, res):
    space, l = build_problem(cfg, values)
    rho, info = steady_state(l, return_info=True)
    tails = truncation_tails(rho)
    res.stats = {
        "residual": info.residual,
        "refinements": info.refinements,
        "min_eigenvalue": info.min_eigenvalue,
        "tail_a": tails[0],
        "tail_b": tails[1],
    }
    return l, rho, tails


def _solve_steady(cfg: RunConfig, overrides: dict) -> PointResult:
    values = cfg.resolve(overrides)
    res = PointResult(overrides, values)
    try:
        _, rho, tails = _steady(cfg, values, res)
    except SolverError as exc:
        res.converged = False
        res.errors.append(str(exc))
        res.rows.append((None, None, None, None, None, None, 0))
        return res
    m = moments(rho)
    res.converged = _tail_notes(res, cfg, tails)
    res.rows.append(
        (
            m.n_a,
            m.n_b,
            _g2_or_none(rho, "cavity"),
            _g2_or_none(rho, "phonon"),
            tails[0],
            tails[1],
            int(res.converged),
        )
    )
    for mode in ("cavity", "phonon"):
        nd = number_distribution(rho, mode)
        try:
            pt = steady_distribution(nd).p
        except UndefinedCorrelationError:
            pt = [None] * nd.p.size
        for q, (p, ptq) in enumerate(zip(nd.p, pt)):
            res.extra_rows.append((mode, q, float(p), None if ptq is None else float(ptq)))
    return res


def _tau_grid(cfg: RunConfig, values: dict[str, float]) -> np.ndarray:
    n = cfg.g2tau["n_points"]
    tau_max = cfg.g2tau["tau_max"]
    if tau_max is None:
        tau_max = 20.0 / values["kappa_a"] if values["kappa_a"] > 0 else 20.0
    if cfg.g2tau["spacing"] == "log":
        return default_tau_grid(20.0 / tau_max, n)
    return np.linspace(0.0, tau_max, n)


def _solve_g2tau(cfg: RunConfig, overrides: dict) -> PointResult:
    values = cfg.resolve(overrides)
    res = PointResult(overrides, values)
    try:
        l, rho, tails = _steady(cfg, values, res)
        taus = _tau_grid(cfg, values)
        ig = cfg.integrator
        curves = {}
        for mode in ("cavity", "phonon"):
            try:
                curves[mode] = g2_tau(l, rho, mode, taus, rel_tol=ig["rel_tol"], abs_tol=min(ig["abs_tol"], 1e-12))
            except UndefinedCorrelationError as exc:
                res.warnings.append(str(exc))
                curves[mode] = [None] * taus.size
    except (SolverError, IntegrationError) as exc:
        res.converged = False
        res.errors.append(str(exc))
        return res
    res.converged = _tail_notes(res, cfg, tails)
    for i, tau in enumerate(taus):
        ga, gb = curves["cavity"][i], curves["phonon"][i]
        res.rows.append((float(tau), None if ga is None else float(ga), None if gb is None else float(gb)))
    return res


_SOLVERS = {"dynamics": _solve_dynamics, "sweep": _solve_steady, "steady": _solve_steady, "g2tau": _solve_g2tau}


def _run_point(args):
    task, cfg, overrides = args
    try:
        return _SOLVERS[task](cfg, overrides)
    except TrilindError as exc:
        res = PointResult(overrides, {})
        res.converged = False
        res.errors.append(f"{type(exc).__name__}: {exc}")
        return res


def solve_points(cfg: RunConfig, task: str, jobs: int = 1) -> list[PointResult]:
    """Solve every grid point; results come back in grid order."""
    points = cfg.points()
    args = [(task, cfg, p) for p in points]
    jobs = max(1, min(int(jobs), len(points)))
    if jobs == 1:
        return [_run_point(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_point, args, chunksize=max(1, len(args) // (4 * jobs))))


# --------------------------------------------------------------------------
# output


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class RunReport:
    """Outcome of one task: output directory, exit code and the metadata written."""

    out_dir: Path
    exit_code: int
    metadata: dict
    files: list


def _exit_code(results: list[PointResult]) -> int:
    failed = sum(not r.converged for r in results)
    if failed == 0:
        return EXIT_OK
    if failed > FAILURE_FRACTION * len(results) or len(results) == 1:
        return EXIT_FAILED
    return EXIT_PARTIAL


def _finish(cfg, out_dir, files, results, started, extra=None, code=None) -> RunReport:
    from . import __version__

    code = _exit_code(results) if code is None else code
    meta = {
        "software": {"name": "trilind", "version": __version__, "backend": kernels.default.name},
        "config": cfg.echo(),
        "time_column_units": cfg.time_units,
        "wall_time_s": time.perf_counter() - started,
        "n_points": len(results),
        "n_failed": sum(not r.converged for r in results),
        "exit_code": code,
        "points": [
            {
                "index": i,
                "overrides": r.overrides,
                "converged": r.converged,
                "stats": r.stats,
                "warnings": r.warnings,
                "errors": r.errors,
            }
            for i, r in enumerate(results)
        ],
        "warnings": [w for r in results for w in r.warnings],
        "errors": [e for r in results for e in r.errors],
        "files": files,
    }
    if extra:
        meta.update(extra)
    with open(out_dir / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(_json_safe(meta), fh, indent=2, sort_keys=False)
        fh.write("\n")
    for msg in meta["errors"]:
        log.error(msg)
    return RunReport(out_dir, code, meta, files)


def _prepare_out(cfg: RunConfig, out_dir) -> Path:
    path = Path(out_dir if out_dir is not None else cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _swept(cfg: RunConfig, r: PointResult) -> tuple:
    return tuple(r.overrides[ax.name] for ax in cfg.sweep)


def _swept_names(cfg: RunConfig) -> tuple:
    return tuple(ax.name for ax in cfg.sweep)


def run_dynamics(cfg: RunConfig, out_dir=None, jobs: int = 1) -> RunReport:
    started = time.perf_counter()
    out = _prepare_out(cfg, out_dir)
    results = solve_points(cfg, "dynamics", jobs)
    names = _swept_names(cfg)
    write_csv(out / "dynamics.csv", names + DYNAMICS_COLUMNS, (_swept(cfg, r) + row for r in results for row in r.rows))
    files = ["dynamics.csv"]
    if cfg.distributions:
        write_csv(out / "dist.csv", names + DIST_COLUMNS, (_swept(cfg, r) + row for r in results for row in r.extra_rows))
        files.append("dist.csv")
    return _finish(cfg, out, files, results, started)


def run_steady(cfg: RunConfig, out_dir=None, jobs: int = 1) -> RunReport:
    started = time.perf_counter()
    out = _prepare_out(cfg, out_dir)
    results = solve_points(cfg, "steady", 1)
    write_csv(out / "steady.csv", STEADY_COLUMNS, results[0].rows)
    write_csv(out / "steady_dist.csv", STEADY_DIST_COLUMNS, results[0].extra_rows)
    return _finish(cfg, out, ["steady.csv", "steady_dist.csv"], results, started)


def run_sweep(cfg: RunConfig, out_dir=None, jobs: int = 1) -> RunReport:
    started = time.perf_counter()
    out = _prepare_out(cfg, out_dir)
    results = solve_points(cfg, "sweep", jobs)
    write_csv(out / "sweep.csv", _swept_names(cfg) + STEADY_COLUMNS, (_swept(cfg, r) + r.rows[0] if r.rows else _swept(cfg, r) + (None,) * 6 + (0,) for r in results))
    return _finish(cfg, out, ["sweep.csv"], results, started)


def run_g2tau(cfg: RunConfig, out_dir=None, jobs: int = 1) -> RunReport:
    started = time.perf_counter()
    out = _prepare_out(cfg, out_dir)
    results = solve_points(cfg, "g2tau", jobs)
    write_csv(out / "g2tau.csv", _swept_names(cfg) + G2TAU_COLUMNS, (_swept(cfg, r) + row for r in results for row in r.rows))
    return _finish(cfg, out, ["g2tau.csv"], results, started)


def wigner_state(cfg: RunConfig, values: dict[str, float], res: PointResult) -> DensityMatrix:
    """State feeding the Wigner task: a dynamics snapshot or the steady state."""
    if cfg.wigner["source"] == "steady":
        _, rho, _ = _steady(cfg, values, res)
        return rho
    space, l = build_problem(cfg, values)
    rho0 = initial_state(cfg, space)
    t_snap = cfg.to_inv_gamma(cfg.wigner["time"], values)
    if t_snap == 0.0:
        return rho0
    traj = evolve(rho0, l, _evolution_spec(cfg, [0.0, t_snap]))
    res.stats = {"steps": traj.n_steps, "rejected_steps": traj.n_rejected, "max_trace_drift": traj.max_trace_drift}
    return traj.states[-1]


def run_wigner(cfg: RunConfig, out_dir=None, jobs: int = 1) -> RunReport:
    started = time.perf_counter()
    out = _prepare_out(cfg, out_dir)
    values = cfg.resolve()
    res = PointResult({}, values)
    files = []
    norms = {}
    try:
        rho = wigner_state(cfg, values, res)
    except (SolverError, IntegrationError) as exc:
        res.converged = False
        res.errors.append(str(exc))
        return _finish(cfg, out, files, [res], started)
    tails = truncation_tails(rho)
    res.stats.update({"tail_a": tails[0], "tail_b": tails[1]})
    res.converged = _tail_notes(res, cfg, tails)
    for mode in ("cavity", "phonon"):
        grid = wigner(partial_trace(rho, mode), cfg.wigner["x_max"], cfg.wigner["n_points"])
        norms[mode] = grid.normalization
        if not grid.normalized:
            res.warnings.append(f"{mode} Wigner normalization {grid.normalization:.4f} outside [0.97, 1.03]")
        rows = (
            (float(grid.axis[i]), float(grid.axis[j]), float(grid.values[j, i]))
            for j in range(grid.axis.size)
            for i in range(grid.axis.size)
        )
        name = f"wigner_{mode}.csv"
        write_csv(out / name, WIGNER_COLUMNS, rows)
        files.append(name)
    return _finish(cfg, out, files, [res], started, extra={"wigner_normalization": norms})


def spectrum_rows(cfg: RunConfig) -> list[tuple]:
    values = cfg.resolve()
    g = values["g"]
    spec = cfg.spectrum
    lo = values["delta"] if spec["delta_min"] is None else evaluate(spec["delta_min"], values, "spectrum.delta_min")
    hi = lo if spec["delta_max"] is None else evaluate(spec["delta_max"], values, "spectrum.delta_max")
    deltas = np.linspace(lo, hi, spec["delta_points"]) if spec["delta_points"] > 1 else np.array([lo])
    rows = []
    for n in range(1, spec["n_max"] + 1):
        for d in deltas:
            sp_ = squeeze_spectrum(n, n, values["delta_a"], float(d), g)
            dp, dm = resonance_detunings(n, float(d), g)
            rows.append((n, float(d), sp_.e_plus, sp_.e_minus, dp, dm))
    return rows


def run_spectrum(cfg: RunConfig, out_dir=None, jobs: int = 1) -> RunReport:
    started = time.perf_counter()
    out = _prepare_out(cfg, out_dir)
    res = PointResult({}, cfg.resolve())
    write_csv(out / "spectrum.csv", SPECTRUM_COLUMNS, spectrum_rows(cfg))
    return _finish(cfg, out, ["spectrum.csv"], [res], started)


RUNNERS = {
    "dynamics": run_dynamics,
    "steady": run_steady,
    "sweep": run_sweep,
    "wigner": run_wigner,
    "spectrum": run_spectrum,
    "g2tau": run_g2tau,
}


def run(cfg: RunConfig, out_dir=None, jobs: Optional[int] = None) -> RunReport:
    """Dispatch on ``cfg.task``."""
    if jobs is None:
        jobs = os.cpu_count() or 1
    return RUNNERS[cfg.task](cfg, out_dir, jobs)
