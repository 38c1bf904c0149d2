"""Lindblad dynamics and steady states.

Density matrices are vectorized column-stacked (``rho.reshape(-1, order="F")``),
so ``vec(A rho B) = (B^T kron A) vec(rho)``.  A collapse ``(rate, o)``
contributes ``rate * (o rho o' - {o'o, rho} / 2)``, which equals
``(rate / 2) D[o] rho`` with ``D[o] rho = 2 o rho o' - o'o rho - rho o'o``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import DimensionError, IntegrationError, SolverError, TruncationError
from .fock import (
    DensityMatrix,
    HilbertSpace,
    Operator,
    mode_annihilator,
    spin_operator,
    truncation_tails,
)

log = logging.getLogger(__name__)

TAIL_WARN = 1e-6
TAIL_FAIL = 1e-3


@dataclass(frozen=True)
class CollapseSet:
    """Dissipation channels as ``(rate, operator)`` pairs."""

    channels: tuple[tuple[float, Operator], ...]

    def __post_init__(self):
        channels = tuple((float(r), o) for r, o in self.channels)
        spaces = {o.space for _, o in channels}
        if len(spaces) > 1:
            raise DimensionError("collapse operators live on different spaces")
        for r, _ in channels:
            if r < 0 or not math.isfinite(r):
                raise ValueError(f"collapse rate must be finite and >= 0, got {r!r}")
        object.__setattr__(self, "channels", channels)

    @classmethod
    def default(
        cls,
        space: HilbertSpace,
        gamma: float = 1.0,
        kappa_a: float = 10.0,
        kappa_b: float = 1.0,
        *,
        kappa_b_on_cavity: bool = False,
    ) -> "CollapseSet":
        """Spin decay, cavity decay and phonon decay.

        ``kappa_b_on_cavity=True`` attaches ``kappa_b`` to the cavity
        annihilator instead of the phonon one, which is the literal form of a
        misprinted master equation; it exists only to reproduce that form.
        """
        a = mode_annihilator(space, "cavity")
        b = mode_annihilator(space, "phonon")
        sm = spin_operator(space, "minus")
        return cls(((gamma, sm), (kappa_a, a), (kappa_b, a if kappa_b_on_cavity else b)))


class Liouvillian:
    """Sparse superoperator acting on column-stacked density matrices."""

    def __init__(self, space: HilbertSpace, superop):
        superop = sp.csr_matrix(superop, dtype=np.complex128)
        n = space.dim * space.dim
        if superop.shape != (n, n):
            raise DimensionError(f"superoperator shape {superop.shape} does not match dim^2 = {n}")
        self.space = space
        self.superop = superop
        self._prepared = {}

    def prepared(self, backend):
        key = backend.name
        if key not in self._prepared:
            self._prepared[key] = backend.prepare(self.superop)
        return self._prepared[key]

    def apply(self, rho) -> np.ndarray:
        """``L(rho)`` as a dense matrix. Accepts a DensityMatrix or raw array."""
        m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        d = self.space.dim
        return (self.superop @ m.reshape(-1, order="F")).reshape(d, d, order="F")

    @property
    def nnz(self) -> int:
        return self.superop.nnz


def build_liouvillian(h: Operator, c: CollapseSet) -> Liouvillian:
    space = h.space
    for _, o in c.channels:
        if o.space != space:
            raise DimensionError(f"collapse operator on {o.space}, Hamiltonian on {space}")
    d = space.dim
    eye = sp.identity(d, dtype=np.complex128, format="csr")
    hs = sp.csr_matrix(h.matrix)
    superop = -1j * (sp.kron(eye, hs) - sp.kron(hs.T, eye))
    for rate, o in c.channels:
        if rate == 0.0:
            continue
        os_ = sp.csr_matrix(o.matrix)
        odo = (os_.conj().T @ os_).tocsr()
        superop = superop + rate * (
            sp.kron(os_.conj(), os_) - 0.5 * sp.kron(eye, odo) - 0.5 * sp.kron(odo.T, eye)
        )
    superop = sp.csr_matrix(superop)
    superop.eliminate_zeros()
    superop.sort_indices()
    return Liouvillian(space, superop)


@dataclass(frozen=True)
class EvolutionSpec:
    """Output grid and integrator settings. Times in units of 1/gamma."""

    t_grid: Sequence[float]
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = math.inf
    method: str = "dopri5"
    fixed_step: Optional[float] = None

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("t_grid must be a non-empty 1-D sequence")
        if t[0] != 0.0:
            raise ValueError("t_grid must start at 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("t_grid must be strictly ascending")
        if self.method not in ("dopri5", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "rk4" and not (self.fixed_step and self.fixed_step > 0):
            raise ValueError("rk4 requires a positive fixed_step")
        object.__setattr__(self, "t_grid", tuple(float(x) for x in t))


@dataclass
class Trajectory:
    """Time series from :func:`evolve`.

    ``states`` is filled when ``store_states`` is set; ``expect`` holds the
    requested expectation values, one array per name.
    """

    times: np.ndarray
    states: Optional[list] = None
    expect: dict = field(default_factory=dict)
    n_steps: int = 0
    n_rejected: int = 0
    max_trace_drift: float = 0.0
    min_eigenvalue: float = math.inf
    max_tails: tuple = (0.0, 0.0)


def _error_norm(v, scale):
    return float(np.sqrt(np.mean(np.abs(v) ** 2 / scale**2)))


def _initial_step(backend, gen, y0, rtol, atol, max_step):
    # Hairer, Norsett & Wanner starting-step heuristic (order 5).
    f0 = backend.matvec(gen, y0)
    scale = atol + rtol * np.abs(y0)
    d0, d1 = _error_norm(y0, scale), _error_norm(f0, scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    d2 = _error_norm(backend.matvec(gen, y1) - f0, scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


def propagate(l: Liouvillian, vec0: np.ndarray, spec: EvolutionSpec, backend=None):
    """Yield ``(t, vec)`` for each grid time, starting with the initial vector.

    ``vec0`` need not be a physical state (the regression theorem propagates
    ``o rho o'``).  The generator is advanced interval by interval; the final
    ``(n_accepted, n_rejected)`` counts are available as the generator's
    return value.
    """
    backend = backend or kernels.default
    gen = l.prepared(backend)
    times = spec.t_grid
    y = np.array(vec0, dtype=np.complex128)
    sent = yield times[0], y
    if sent is not None:
        y = sent
    n_acc = n_rej = 0
    h = None
    if spec.method == "dopri5" and l.nnz and len(times) > 1:
        h = _initial_step(backend, gen, y, spec.rel_tol, spec.abs_tol, spec.max_step)
    for t0, t1 in zip(times[:-1], times[1:]):
        if spec.method == "rk4":
            n = max(1, math.ceil((t1 - t0) / spec.fixed_step - 1e-9))
            y = backend.rk4_advance(gen, y, t0, t1, n)
            n_acc += n
        elif l.nnz:
            y, h, acc, rej = backend.dopri5_advance(
                gen, y, t0, t1, h, spec.rel_tol, spec.abs_tol, spec.max_step
            )
            n_acc += acc
            n_rej += rej
        sent = yield t1, y
        if sent is not None:
            y = sent
    return n_acc, n_rej


def evolve(
    rho0: DensityMatrix,
    l: Liouvillian,
    spec: EvolutionSpec,
    *,
    e_ops: Optional[Mapping[str, Operator]] = None,
    observe: Optional[Callable[[float, DensityMatrix], None]] = None,
    store_states: bool = True,
    check_positivity: bool = True,
    backend=None,
) -> Trajectory:
    """Integrate the master equation from ``rho0`` over ``spec.t_grid``.

    Output states are symmetrized, ``rho <- (rho + rho') / 2``, and the
    symmetrized state seeds the next interval.  Trace drift, the lowest
    eigenvalue and the Fock tails are tracked on the returned trajectory.
    """
    if rho0.space != l.space:
        raise DimensionError(f"state on {rho0.space}, Liouvillian on {l.space}")
    d = l.space.dim
    e_ops = dict(e_ops or {})
    for name, op in e_ops.items():
        if op.space != l.space:
            raise DimensionError(f"e_op {name!r} on wrong space")
    # Tr(A X) = vec(A^T) . vec(X) for column-stacked X.
    e_vecs = {name: op.matrix.T.reshape(-1, order="F") for name, op in e_ops.items()}

    traj = Trajectory(times=np.asarray(spec.t_grid), states=[] if store_states else None)
    records = {name: [] for name in e_ops}
    tr0 = np.trace(rho0.matrix).real
    gen = propagate(l, rho0.matrix.reshape(-1, order="F"), spec, backend)
    tails = [0.0, 0.0]
    try:
        t, vec = next(gen)
        while True:
            m = vec.reshape(d, d, order="F")
            m = 0.5 * (m + m.conj().T)
            if not np.all(np.isfinite(m)):
                raise IntegrationError(f"non-finite state at t = {t!r}", t_reached=t)
            rho = DensityMatrix(l.space, m, check=False)
            traj.max_trace_drift = max(traj.max_trace_drift, abs(np.trace(m).real - tr0))
            if check_positivity:
                traj.min_eigenvalue = min(traj.min_eigenvalue, rho.min_eigenvalue())
            ta, tb = truncation_tails(rho)
            tails = [max(tails[0], ta), max(tails[1], tb)]
            flat = m.reshape(-1, order="F")
            for name, ev in e_vecs.items():
                records[name].append(complex(ev @ flat))
            if store_states:
                traj.states.append(rho)
            if observe is not None:
                observe(t, rho)
            t, vec = gen.send(flat)
    except StopIteration as stop:
        if stop.value:
            traj.n_steps, traj.n_rejected = stop.value
    traj.max_tails = tuple(tails)
    traj.expect = {name: np.asarray(v) for name, v in records.items()}
    return traj


@dataclass(frozen=True)
class SteadyStateInfo:
    residual: float
    refinements: int
    min_eigenvalue: float


def _trace_row(d):
    return np.arange(d) * (d + 1)


def steady_state(l: Liouvillian, *, max_refine: int = 3, tol: float = 1e-10, return_info: bool = False):
    """Unique stationary state of ``l`` by sparse LU.

    The equation for ``rho_00`` is replaced by ``Tr rho = 1``; iterative
    refinement drives ``||L vec(rho)||`` below ``tol``.
    """
    d = l.space.dim
    n = d * d
    # A purely Hamiltonian generator is anti-Hermitian and has no unique fixed point.
    if abs(l.superop + l.superop.conj().T).max() == 0.0:
        raise SolverError("steady state undefined without dissipation; all decay rates are zero")
    a = l.superop.tolil(copy=True)
    a[0, :] = 0.0
    a[0, _trace_row(d)] = 1.0
    a = a.tocsc()
    rhs = np.zeros(n, dtype=np.complex128)
    rhs[0] = 1.0
    try:
        lu = spla.splu(a)
    except RuntimeError as exc:
        raise SolverError(
            f"steady-state system is singular ({exc}); check that all decay rates are positive "
            "or increase the truncation"
        ) from exc
    x = lu.solve(rhs)
    refinements = 0
    residual = np.linalg.norm(l.superop @ x)
    while residual >= tol and refinements < max_refine:
        x = x + lu.solve(rhs - a @ x)
        refinements += 1
        residual = np.linalg.norm(l.superop @ x)
    if not np.all(np.isfinite(x)):
        raise SolverError("steady-state solve produced non-finite entries; increase truncation or check rates")
    m = x.reshape(d, d, order="F")
    m = 0.5 * (m + m.conj().T)
    m = m / np.trace(m).real
    residual = float(np.linalg.norm(l.superop @ m.reshape(-1, order="F")))
    if residual >= tol:
        raise SolverError(f"steady-state residual {residual:.3e} above {tol:.0e}; the system may be ill-conditioned")
    rho = DensityMatrix(l.space, m, check=False)
    lowest = rho.min_eigenvalue()
    if lowest < -DensityMatrix.POSITIVITY_TOL:
        raise SolverError(f"steady state has negative eigenvalue {lowest:.3e}; increase the truncation")
    rho.validate()
    if return_info:
        return rho, SteadyStateInfo(residual, refinements, lowest)
    return rho


def dense_steady_state(l: Liouvillian) -> DensityMatrix:
    """Reference solution: eigenvector of the dense superoperator with smallest |eigenvalue|."""
    d = l.space.dim
    vals, vecs = np.linalg.eig(l.superop.toarray())
    k = int(np.argmin(np.abs(vals)))
    m = vecs[:, k].reshape(d, d, order="F")
    m = m / np.trace(m)
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(l.space, m, check=False)


def assess_truncation(rho: DensityMatrix, warn: float = TAIL_WARN, fail: float = TAIL_FAIL):
    """Return ``(tail_a, tail_b, warnings)``; raise TruncationError above ``fail``."""
    tail_a, tail_b = truncation_tails(rho)
    return _judge_tails(tail_a, tail_b, warn, fail)


def _judge_tails(tail_a, tail_b, warn=TAIL_WARN, fail=TAIL_FAIL):
    notes = []
    for label, tail in (("cavity", tail_a), ("phonon", tail_b)):
        if tail > fail:
            raise TruncationError(f"{label} tail population {tail:.3e} exceeds {fail:.0e}; increase truncation")
        if tail > warn:
            notes.append(f"{label} tail population {tail:.3e} exceeds {warn:.0e}")
    for note in notes:
        log.warning(note)
    return tail_a, tail_b, notes


def check_tails(tails: Iterable[float], warn: float = TAIL_WARN, fail: float = TAIL_FAIL):
    tail_a, tail_b = tails
    return _judge_tails(tail_a, tail_b, warn, fail)
