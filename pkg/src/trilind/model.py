"""Hamiltonians of the driven spin-photon-phonon system.

All rates are dimensionless multiples of the atomic decay rate ``gamma``.

Three generators are provided:

* :func:`build_full_hamiltonian` - the lab-frame tripartite model,
  ``w_b b'b + D_c a'a + (D/2) s_z + W s_x + g (b' + b)(a' s_- + a s_+)``.
* :func:`build_beamsplitter_hamiltonian` - red-sideband RWA, exchange term
  ``g (a' b s_- + b' a s_+)``.
* :func:`build_squeeze_hamiltonian` - blue-sideband RWA, pair-creation term
  ``g (a' b' s_- + b a s_+)``.

The RWA builders take the detuned form with ``delta_a``, ``delta_b`` and
``delta = delta_a - Delta``; the resonant models are the special case
``delta_a = delta_b = 0``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .fock import HilbertSpace, Operator, mode_annihilator, number_operator, spin_operator


@dataclass(frozen=True)
class SystemParams:
    """Lab-frame parameters, units of gamma.

    The default pump ``omega_pump = 0.2`` is the reading of the pump strength
    that reproduces the reported blockade statistics (see README); pass
    ``omega_pump=2.0`` for the ``0.2 * kappa_a`` reading.
    """

    g: float = 40.0
    omega_b: float = 400.0
    delta_c: float = -400.0
    delta_atom: float = 0.0
    omega_pump: float = 0.2
    gamma: float = 1.0
    kappa_a: float = 10.0
    kappa_b: float = 1.0

    def __post_init__(self):
        for name in ("g", "gamma", "kappa_a", "kappa_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ValueError(f"{f.name} must be finite")

    def replace(self, **changes) -> "SystemParams":
        return type(self)(**{**asdict(self), **changes})


@dataclass(frozen=True)
class EffectiveParams:
    """Rotating-frame parameters of the RWA models."""

    delta_a: float = 0.0
    delta_b: float = 0.0
    delta: float = 0.0
    g: float = 40.0
    omega_pump: float = 0.2

    def __post_init__(self):
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ValueError(f"{f.name} must be finite")

    def replace(self, **changes) -> "EffectiveParams":
        return type(self)(**{**asdict(self), **changes})


@dataclass(frozen=True)
class SpectrumPoint:
    n_a: int
    n_b: int
    e_plus: float
    e_minus: float


class _Ops:
    """Embedded operator set shared by the builders."""

    def __init__(self, space: HilbertSpace):
        self.a = mode_annihilator(space, "cavity")
        self.b = mode_annihilator(space, "phonon")
        self.ad = self.a.dag()
        self.bd = self.b.dag()
        self.na = number_operator(space, "cavity")
        self.nb = number_operator(space, "phonon")
        self.sx = spin_operator(space, "x")
        self.sz = spin_operator(space, "z")
        self.sp = spin_operator(space, "plus")
        self.sm = spin_operator(space, "minus")


def build_full_hamiltonian(p: SystemParams, space: HilbertSpace) -> Operator:
    o = _Ops(space)
    coupling = (o.bd + o.b) @ (o.ad @ o.sm + o.a @ o.sp)
    return (
        p.omega_b * o.nb
        + p.delta_c * o.na
        + (p.delta_atom / 2) * o.sz
        + p.omega_pump * o.sx
        + p.g * coupling
    )


def _rwa_bare(p: EffectiveParams, o: _Ops) -> Operator:
    return p.delta_b * o.nb + p.delta_a * o.na + ((p.delta_a - p.delta) / 2) * o.sz + p.omega_pump * o.sx


def build_beamsplitter_hamiltonian(p: EffectiveParams, space: HilbertSpace) -> Operator:
    o = _Ops(space)
    return _rwa_bare(p, o) + p.g * (o.ad @ o.b @ o.sm + o.bd @ o.a @ o.sp)


def build_squeeze_hamiltonian(p: EffectiveParams, space: HilbertSpace) -> Operator:
    o = _Ops(space)
    return _rwa_bare(p, o) + p.g * (o.ad @ o.bd @ o.sm + o.b @ o.a @ o.sp)


def squeeze_spectrum(n_a: int, n_b: int, delta_a: float, delta: float, g: float) -> SpectrumPoint:
    """Dressed energies of the pair ``{|n_a-1, n_b-1, e>, |n_a, n_b, g>}``.

    Energies are measured from ``|0,0,g>`` and assume ``delta_b = delta_a``.
    """
    if n_a < 1 or n_b < 1:
        raise ValueError("dressed pair requires n_a >= 1 and n_b >= 1")
    centre = (n_a + n_b) * delta_a - (delta_a + delta) / 2
    half_gap = 0.5 * math.sqrt(4 * g * g * n_a * n_b + (delta_a + delta) ** 2)
    return SpectrumPoint(n_a, n_b, centre + half_gap, centre - half_gap)


def rabi_splitting(delta: float, g: float) -> tuple[float, float]:
    """Cavity detunings ``delta_a`` at which the first dressed pair is resonant with ``|0,0,g>``."""
    if g < 0:
        raise ValueError("g must be >= 0")
    root = math.sqrt(2 * g * g + delta * delta)
    return 0.5 * (delta + root), 0.5 * (delta - root)


def resonance_detunings(n: int, delta: float, g: float) -> tuple[float, float]:
    """``delta_a`` values where a level of the ``n``-th dressed pair is degenerate with ``|0,0,g>``.

    Solves ``e_pm(delta_a) = 0`` for :func:`squeeze_spectrum` with
    ``delta_b = delta_a``; ``n = 1`` reduces to :func:`rabi_splitting`.
    """
    if n < 1:
        raise ValueError("dressed pair requires n >= 1")
    if g < 0:
        raise ValueError("g must be >= 0")
    denom = 4 * n - 2
    root = math.sqrt(delta * delta + denom * n * g * g)
    return (delta + root) / denom, (delta - root) / denom


def symmetry_generator(space: HilbertSpace, kind: str) -> Operator:
    """U(1) generator commuting with the RWA Hamiltonian at zero pump."""
    o = _Ops(space)
    if kind == "beamsplitter":
        return 2 * o.na + o.nb + 0.5 * o.sz
    if kind == "squeeze":
        return o.na + o.nb + o.sz
    raise ValueError(f"unknown symmetry kind {kind!r}")


def total_excitation_operator(space: HilbertSpace) -> Operator:
    o = _Ops(space)
    return o.sp @ o.sm + 0.5 * (o.na + o.nb)


def restrict(op: Operator, states) -> np.ndarray:
    """Compression ``P op P`` onto the span of the given basis states, as a small matrix."""
    basis = np.column_stack([s.amplitudes for s in states])
    return basis.conj().T @ op.matrix @ basis
