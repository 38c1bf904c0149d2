"""Plain record types shared by the numerical and closed-form modules."""

from dataclasses import dataclass


@dataclass(frozen=True)
class MomentRecord:
    """Occupations, spin excitation and total excitation ``spin_exc + (n_a + n_b) / 2``."""

    n_a: float
    n_b: float
    spin_exc: float
    n_e: float

    @classmethod
    def from_parts(cls, n_a: float, n_b: float, spin_exc: float) -> "MomentRecord":
        return cls(n_a, n_b, spin_exc, spin_exc + (n_a + n_b) / 2)
