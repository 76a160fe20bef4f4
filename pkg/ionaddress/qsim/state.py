"""Density-operator state of one qubit plus its spectator levels."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

# Smallest eigenvalue a state may have before it counts as unphysical
PSD_TOLERANCE = 1e-10


class StateError(ValueError):
    """Raised when a state is unphysical or a propagation request is
    invalid."""


@dataclass(frozen=True)
class QubitState:
    """Qubit state in the tracked rotating frame.

    Levels 0 and 1 are the qubit, further levels are spectators.
    ``leaked`` is population lost from all levels; ``frame_phase`` is the
    phase the controller has accumulated for Zeeman compensation.
    """

    rho: np.ndarray
    leaked: float = 0.0
    frame_phase: float = 0.0
    time_s: float = 0.0

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
            raise StateError(f"Density operator must be square, at least 2x2, got {rho.shape}")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @classmethod
    def ground(cls, dims: int = 2, spam: float = 0.0) -> QubitState:
        """|0>, or |1> with probability `spam`."""
        rho = np.zeros((dims, dims), dtype=complex)
        rho[0, 0] = 1.0 - spam
        rho[1, 1] = spam
        return cls(rho)

    @classmethod
    def pure(cls, psi: np.ndarray, dims: Optional[int] = None) -> QubitState:
        psi = np.asarray(psi, dtype=complex)
        dims = dims or len(psi)
        v = np.zeros(dims, dtype=complex)
        v[: len(psi)] = psi / np.linalg.norm(psi)
        return cls(np.outer(v, v.conj()))

    @property
    def dims(self) -> int:
        return int(self.rho.shape[0])

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    def population(self, level: int) -> float:
        return float(np.real(self.rho[level, level]))

    @property
    def p0(self) -> float:
        return self.population(0)

    @property
    def p1(self) -> float:
        return self.population(1)

    @property
    def coherence(self) -> complex:
        return complex(self.rho[0, 1])

    def fidelity(self, psi: np.ndarray) -> float:
        """Overlap with a pure qubit state."""
        psi = np.asarray(psi, dtype=complex)
        v = np.zeros(self.dims, dtype=complex)
        v[: len(psi)] = psi
        return float(np.real(v.conj() @ self.rho @ v))

    def check(self) -> QubitState:
        """Return self, or raise `StateError` if not positive semidefinite."""
        h = 0.5 * (self.rho + self.rho.conj().T)
        smallest = float(np.linalg.eigvalsh(h)[0])
        if smallest < -PSD_TOLERANCE:
            raise StateError(f"Density operator has eigenvalue {smallest:.3g}")
        return self

    def evolved(
        self, rho: np.ndarray, leaked: float, frame_phase: float, dt: float
    ) -> QubitState:
        return replace(
            self,
            rho=rho,
            leaked=self.leaked + leaked,
            frame_phase=self.frame_phase + frame_phase,
            time_s=self.time_s + dt,
        )
