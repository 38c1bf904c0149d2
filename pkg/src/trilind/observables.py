"""Moments, photon/phonon statistics and Wigner functions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import UndefinedCorrelationError
from .fock import (
    MODES,
    DensityMatrix,
    ReducedDensity,
    expectation,
    mode_annihilator,
    number_operator,
    partial_trace,
    spin_operator,
)
from .lindblad import EvolutionSpec, Liouvillian, propagate
from .records import MomentRecord

log = logging.getLogger(__name__)

OCCUPATION_FLOOR = 1e-12
WIGNER_NORM_BAND = (0.97, 1.03)


def moments(rho: DensityMatrix) -> MomentRecord:
    space = rho.space
    n_a = expectation(number_operator(space, "cavity"), rho).real
    n_b = expectation(number_operator(space, "phonon"), rho).real
    sp = spin_operator(space, "plus")
    spin_exc = expectation(sp @ sp.dag(), rho).real
    return MomentRecord.from_parts(n_a, n_b, spin_exc)


def _mode_matrix(rho, mode):
    """Single-mode reduced matrix."""
    if isinstance(rho, ReducedDensity):
        if rho.subsystem != mode:
            raise ValueError(f"reduced state of {rho.subsystem!r} cannot give {mode!r} statistics")
        return rho.matrix
    return partial_trace(rho, mode).matrix


def g2_zero(rho: Union[DensityMatrix, ReducedDensity], mode: str) -> float:
    """Equal-time ``<o'o'oo> / <o'o>^2``; raises if the occupation vanishes."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    m = _mode_matrix(rho, mode)
    q = np.arange(m.shape[0])
    p = np.real(np.diag(m))
    n = float(q @ p)
    if n <= OCCUPATION_FLOOR:
        raise UndefinedCorrelationError(f"{mode} occupation {n:.3e} too small for g2")
    return float((q * (q - 1)) @ p) / n**2


def default_tau_grid(kappa_a: float = 10.0, n_points: int = 200, span: float = 20.0) -> np.ndarray:
    """Zero followed by log-spaced delays up to ``span / kappa_a``."""
    tau_max = span / kappa_a
    return np.concatenate([[0.0], np.geomspace(tau_max * 1e-4, tau_max, n_points - 1)])


def g2_tau(
    l: Liouvillian,
    rho_ss: DensityMatrix,
    mode: str,
    tau_grid: Sequence[float],
    *,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
    backend=None,
) -> np.ndarray:
    """Delayed correlation via the quantum regression theorem.

    ``g2(tau) = Tr[o'o exp(L tau)(o rho o')] / <o'o>^2``.
    """
    space = l.space
    o = mode_annihilator(space, mode).matrix
    num = number_operator(space, mode).matrix
    n_ss = float(np.real(np.sum(num * rho_ss.matrix.T)))
    if n_ss <= OCCUPATION_FLOOR:
        raise UndefinedCorrelationError(f"{mode} occupation {n_ss:.3e} too small for g2")
    seed = o @ rho_ss.matrix @ o.conj().T
    probe = num.T.reshape(-1, order="F")
    spec = EvolutionSpec(tau_grid, rel_tol=rel_tol, abs_tol=abs_tol)
    out = [float(np.real(probe @ vec)) / n_ss**2 for _, vec in propagate(l, seed.reshape(-1, order="F"), spec, backend)]
    return np.asarray(out)


@dataclass(frozen=True)
class NumberDistribution:
    mode: str
    p: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.arange(self.p.size) @ self.p)


def number_distribution(rho: DensityMatrix, mode: str) -> NumberDistribution:
    """``p(q) = Tr(|q><q| rho)`` for ``q = 0..n_max``."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    pops = rho.populations()
    p = pops.sum(axis=(1, 2)) if mode == "cavity" else pops.sum(axis=(0, 2))
    return NumberDistribution(mode, p)


def steady_distribution(nd: NumberDistribution, n_s: Optional[float] = None) -> NumberDistribution:
    """Fraction of excitations carried by ``q``-quanta states, ``q p(q) / n_s``."""
    n_s = nd.mean if n_s is None else n_s
    if n_s <= OCCUPATION_FLOOR:
        raise UndefinedCorrelationError(f"occupation {n_s:.3e} too small for the steady distribution")
    q = np.arange(nd.p.size)
    return NumberDistribution(nd.mode, q * nd.p / n_s)


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """``values[j, i]`` is W at ``alpha = axis[i] + 1j * axis[j]``."""

    axis: np.ndarray
    values: np.ndarray

    @property
    def normalization(self) -> float:
        if self.axis.size < 2:
            return math.nan
        step = self.axis[1] - self.axis[0]
        return float(self.values.sum() * step * step)

    @property
    def normalized(self) -> bool:
        lo, hi = WIGNER_NORM_BAND
        return lo <= self.normalization <= hi


def _padded_dim(n_keep: int, beta_max: float) -> int:
    # Truncated D(beta)|n> for n < n_keep is accurate when the padded space
    # comfortably contains (|beta| + sqrt(n))^2 plus its spread.
    reach = beta_max + math.sqrt(n_keep)
    return max(n_keep, int(math.ceil(reach * reach + 6 * reach + 30)))


def wigner(
    reduced: ReducedDensity,
    x_max: float = 3.0,
    n_points: int = 101,
    *,
    pad_dim: Optional[int] = None,
) -> WignerGrid:
    """Displaced-parity Wigner function ``(2/pi) Tr[D'(alpha) rho D(alpha) P]``.

    Uses ``D(alpha) P D'(alpha) = D(2 alpha) P`` so only the kept block of
    ``D(2 alpha)`` is needed.  ``D`` is the matrix exponential of
    ``beta a' - beta* a`` in a padded Fock space, evaluated through one
    eigendecomposition of ``a' - a`` and phase rotations.
    """
    if reduced.subsystem not in MODES:
        raise ValueError("Wigner function requires a cavity or phonon reduced state")
    axis = np.linspace(-x_max, x_max, n_points)
    alpha = axis[None, :] + 1j * axis[:, None]
    beta = 2.0 * alpha.ravel()
    n_keep = reduced.dim
    dim = pad_dim or _padded_dim(n_keep, float(np.abs(beta).max(initial=0.0)))

    ladder = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    # exp(r (a' - a)) = V exp(-i r lam) V'   with   i (a' - a) = V lam V'.
    lam, vecs = np.linalg.eigh(1j * (ladder.T - ladder))
    v = vecs[:n_keep, :]
    r = np.abs(beta)
    phi = np.angle(beta)
    phase = np.exp(-1j * np.outer(r, lam))  # (points, dim)
    block = np.einsum("mk,pk,nk->pmn", v, phase, v.conj(), optimize=True)
    q = np.arange(n_keep)
    rot = np.exp(1j * np.outer(phi, q))  # e^{i phi m}
    block = rot[:, :, None] * block * rot.conj()[:, None, :]
    parity = (-1.0) ** q
    # Tr[rho D P] = sum_{m,n} rho_{nm} D_{mn} (-1)^n
    w = (2.0 / math.pi) * np.real(np.einsum("nm,pmn,n->p", reduced.matrix, block, parity, optimize=True))
    grid = WignerGrid(axis, w.reshape(n_points, n_points))
    if not grid.normalized:
        log.warning("Wigner normalization %.4f outside %s; enlarge or refine the grid", grid.normalization, WIGNER_NORM_BAND)
    return grid
