"""Operators and states on the truncated cavity (x) phonon (x) spin-1/2 space.

Basis ordering is cavity-major, then phonon, then spin (minor)::

    i = (n_a * (n_b_max + 1) + n_b) * 2 + s,    s = 0 for |g>, 1 for |e>

so ``np.kron(cavity, np.kron(phonon, spin))`` embeds single-factor matrices.
All containers hold read-only arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionError, InvalidTruncationError

MODES = ("cavity", "phonon")
SUBSYSTEMS = ("cavity", "phonon", "spin")
SPIN_KINDS = ("x", "y", "z", "plus", "minus")

_SPIN_LABELS = {"g": 0, "e": 1, 0: 0, 1: 1}


def _frozen(array, dtype=complex):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HilbertSpace:
    """Truncation bounds of the composite space."""

    n_a_max: int
    n_b_max: int

    def __post_init__(self):
        for name in ("n_a_max", "n_b_max"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidTruncationError(f"{name} must be an integer >= 1, got {value!r}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.n_a_max + 1, self.n_b_max + 1, 2)

    @property
    def dim(self) -> int:
        return 2 * (self.n_a_max + 1) * (self.n_b_max + 1)

    def index(self, n_a: int, n_b: int, s) -> int:
        """Flat basis index of ``|n_a, n_b, s>``."""
        s = _SPIN_LABELS.get(s, s)
        if not (0 <= n_a <= self.n_a_max and 0 <= n_b <= self.n_b_max and s in (0, 1)):
            raise IndexError(f"|{n_a},{n_b},{s}> outside space {self.n_a_max, self.n_b_max}")
        return (n_a * (self.n_b_max + 1) + n_b) * 2 + s

    def label(self, i: int) -> tuple[int, int, int]:
        """Inverse of :meth:`index`."""
        if not 0 <= i < self.dim:
            raise IndexError(f"index {i} outside [0, {self.dim})")
        rest, s = divmod(i, 2)
        n_a, n_b = divmod(rest, self.n_b_max + 1)
        return n_a, n_b, s

    def subsystem_dim(self, name: str) -> int:
        return self.dims[_subsystem_axis(name)]


def build_space(n_a_max: int, n_b_max: int) -> HilbertSpace:
    return HilbertSpace(n_a_max, n_b_max)


def _subsystem_axis(name: str) -> int:
    try:
        return SUBSYSTEMS.index(name)
    except ValueError:
        raise ValueError(f"unknown subsystem {name!r}; expected one of {SUBSYSTEMS}") from None


class Operator:
    """Dense matrix tagged with the space it acts on."""

    __slots__ = ("space", "matrix")

    def __init__(self, space: HilbertSpace, matrix):
        matrix = _frozen(matrix)
        if matrix.shape != (space.dim, space.dim):
            raise DimensionError(f"matrix shape {matrix.shape} does not match dim {space.dim}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def _check(self, other: "Operator"):
        if other.space != self.space:
            raise DimensionError(f"space mismatch: {self.space} vs {other.space}")

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix + other.matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix - other.matrix)
        return NotImplemented

    def __neg__(self):
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return Operator(self.space, scalar * self.matrix)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix @ other.matrix)
        return NotImplemented

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def commutator(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix - other.matrix @ self.matrix)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def apply(self, state: "PureState") -> np.ndarray:
        """Return ``op |psi>`` as a raw (unnormalized) amplitude vector."""
        self._check(state)
        return self.matrix @ state.amplitudes

    def __repr__(self):
        return f"Operator(space={self.space}, nnz={np.count_nonzero(self.matrix)})"


class PureState:
    """Normalized state vector."""

    __slots__ = ("space", "amplitudes")

    def __init__(self, space: HilbertSpace, amplitudes, *, normalize: bool = False):
        amps = np.array(amplitudes, dtype=complex)
        if amps.shape != (space.dim,):
            raise DimensionError(f"amplitude vector of length {amps.shape} does not match dim {space.dim}")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "amplitudes", _frozen(amps))

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


class DensityMatrix:
    """Physical density matrix. Invariants are checked on construction unless ``check=False``."""

    __slots__ = ("space", "matrix")

    HERMITIAN_TOL = 1e-10
    TRACE_TOL = 1e-8
    POSITIVITY_TOL = 1e-8

    def __init__(self, space: HilbertSpace, matrix, *, check: bool = True):
        matrix = _frozen(matrix)
        if matrix.shape != (space.dim, space.dim):
            raise DimensionError(f"matrix shape {matrix.shape} does not match dim {space.dim}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", matrix)
        if check:
            self.validate()

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def validate(self):
        m = self.matrix
        herm = np.max(np.abs(m - m.conj().T))
        if herm > self.HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > self.TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} differs from 1")
        lowest = self.min_eigenvalue()
        if lowest < -self.POSITIVITY_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lowest:.3e}")

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def populations(self) -> np.ndarray:
        """Diagonal reshaped to ``(n_a_max+1, n_b_max+1, 2)``."""
        return np.real(np.diag(self.matrix)).reshape(self.space.dims)

    @classmethod
    def from_state(cls, state: PureState) -> "DensityMatrix":
        return state.density()

    @classmethod
    def maximally_mixed(cls, space: HilbertSpace) -> "DensityMatrix":
        return cls(space, np.eye(space.dim) / space.dim)


@dataclass(frozen=True, eq=False)
class ReducedDensity:
    subsystem: str
    matrix: np.ndarray

    def __post_init__(self):
        _subsystem_axis(self.subsystem)
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"reduced matrix must be square, got {m.shape}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def _embed(space: HilbertSpace, cavity=None, phonon=None, spin=None) -> np.ndarray:
    na, nb, ns = space.dims
    cavity = np.eye(na) if cavity is None else cavity
    phonon = np.eye(nb) if phonon is None else phonon
    spin = np.eye(ns) if spin is None else spin
    return np.kron(cavity, np.kron(phonon, spin))


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim))


def mode_annihilator(space: HilbertSpace, mode: str) -> Operator:
    """Truncated annihilation operator of ``"cavity"`` or ``"phonon"``."""
    if mode == "cavity":
        return Operator(space, _embed(space, cavity=_ladder(space.n_a_max)))
    if mode == "phonon":
        return Operator(space, _embed(space, phonon=_ladder(space.n_b_max)))
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


_SPIN = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    "plus": np.array([[0, 0], [1, 0]], dtype=complex),
    "minus": np.array([[0, 1], [0, 0]], dtype=complex),
}


def spin_operator(space: HilbertSpace, kind: str) -> Operator:
    """Embedded Pauli (``x``, ``y``, ``z``) or ladder (``plus``, ``minus``) operator.

    With ``s=0`` the ground state, ``sigma_z |e> = +|e>`` and
    ``sigma_pm = (sigma_x +- i sigma_y) / 2``.
    """
    try:
        block = _SPIN[kind]
    except KeyError:
        raise ValueError(f"unknown spin operator {kind!r}; expected one of {SPIN_KINDS}") from None
    return Operator(space, _embed(space, spin=block))


def number_operator(space: HilbertSpace, mode: str) -> Operator:
    a = mode_annihilator(space, mode)
    return a.dag() @ a


def basis_state(space: HilbertSpace, n_a: int, n_b: int, s: Union[str, int]) -> PureState:
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index(n_a, n_b, s)] = 1.0
    return PureState(space, amps)


def partial_trace(rho: DensityMatrix, keep: str) -> ReducedDensity:
    """Reduced density matrix of one subsystem."""
    axis = _subsystem_axis(keep)
    na, nb, ns = rho.space.dims
    t = rho.matrix.reshape(na, nb, ns, na, nb, ns)
    spec = {0: "aijbij->ab", 1: "iajibj->ab", 2: "ijaijb->ab"}[axis]
    return ReducedDensity(keep, np.einsum(spec, t))


def expectation(op: Operator, rho: DensityMatrix) -> complex:
    """``Tr(op rho)``."""
    if op.space != rho.space:
        raise DimensionError(f"space mismatch: {op.space} vs {rho.space}")
    # Tr(AB) without forming the product.
    return complex(np.sum(op.matrix * rho.matrix.T))


def truncation_tails(rho: DensityMatrix) -> tuple[float, float]:
    """Populations of the highest kept cavity and phonon Fock levels."""
    pops = rho.populations()
    return float(pops[-1].sum()), float(pops[:, -1].sum())
