"""Closed-form results for the resonant, undriven, lossless models.

Nothing here touches the master-equation solver, so these functions serve as
independent references for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_laguerre

from .fock import HilbertSpace, PureState, basis_state
from .records import MomentRecord

BRANCHES = ("squeeze", "beamsplitter")


@dataclass(frozen=True)
class AnalyticState:
    """``cos(theta) |n,n,e> - i sin(theta) |partner, g>``.

    The partner is ``|n+1, n+1>`` on the squeeze branch and ``|n+1, n-1>``
    on the beamsplitter branch.
    """

    n: int
    theta: float
    branch: str

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ValueError(f"unknown branch {self.branch!r}")
        if self.n < 0:
            raise ValueError("n must be >= 0")

    @property
    def amplitudes(self) -> tuple[complex, complex]:
        return complex(math.cos(self.theta)), -1j * math.sin(self.theta)

    @property
    def partner(self) -> tuple[int, int]:
        if self.branch == "squeeze":
            return self.n + 1, self.n + 1
        return self.n + 1, self.n - 1

    def to_state(self, space: HilbertSpace) -> PureState:
        c_e, c_g = self.amplitudes
        amps = c_e * basis_state(space, self.n, self.n, "e").amplitudes
        if abs(c_g) > 0.0:
            amps = amps + c_g * basis_state(space, *self.partner, "g").amplitudes
        return PureState(space, amps, normalize=True)


def squeeze_trajectory(n: int, g: float, t: float) -> tuple[AnalyticState, MomentRecord]:
    theta = g * (n + 1) * t
    s2 = math.sin(theta) ** 2
    return AnalyticState(n, theta, "squeeze"), MomentRecord.from_parts(n + s2, n + s2, 1.0 - s2)


def beamsplitter_trajectory(n: int, g: float, t: float) -> tuple[AnalyticState, MomentRecord]:
    theta = g * math.sqrt(n * (n + 1)) * t
    s2 = math.sin(theta) ** 2
    return AnalyticState(n, theta, "beamsplitter"), MomentRecord.from_parts(n + s2, n - s2, 1.0 - s2)


def dressed_energies(n: int, g: float, branch: str) -> tuple[float, float]:
    """Eigenvalue pair ``(+lam, -lam)`` of the coupling restricted to the branch's two-level manifold."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if branch == "squeeze":
        lam = g * (n + 1)
    elif branch == "beamsplitter":
        lam = g * math.sqrt(n * (n + 1))
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return lam, -lam


def vacuum_rabi_frequency(g: float, omega_b: float, delta_c: float) -> float:
    """Oscillation frequency near blue-sideband resonance, ``sqrt(g^2 + (w_b + D_c)^2 / 4)``."""
    if g <= 0:
        raise ValueError("g must be > 0")
    return math.sqrt(g * g + (omega_b + delta_c) ** 2 / 4)


def vacuum_fluctuation_signal(blue_occ: float, red_occ: float) -> float:
    """Blue-sideband minus red-sideband occupancy."""
    return blue_occ - red_occ


def wigner_fock_diagonal(populations, alpha) -> np.ndarray:
    """Wigner function of a Fock-diagonal state from the Laguerre series.

    ``W(alpha) = (2/pi) exp(-2|alpha|^2) sum_n p_n (-1)^n L_n(4|alpha|^2)``.
    """
    alpha = np.asarray(alpha)
    x = 4.0 * np.abs(alpha) ** 2
    total = np.zeros(alpha.shape, dtype=float)
    for n, p in enumerate(np.asarray(populations, dtype=float)):
        if p:
            total = total + p * (-1) ** n * eval_laguerre(n, x)
    return (2.0 / math.pi) * np.exp(-x / 2.0) * total
