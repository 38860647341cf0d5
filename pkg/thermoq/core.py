"""
Units, thermal state and model-system descriptions shared by every other module.

All quantities are dimensionless in Hartree-style scaling (hbar = m = k_B = 1)
unless a UnitsConfig overrides them.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from thermoq.errors import ContinuumSpectrumError, DomainError, ModeIndexError

DEFAULT_N_STATES = 10


@dataclass(frozen=True)
class UnitsConfig:
    """Physical constants used by all formulas. Defaults give Hartree scaling."""

    hbar: float = 1.0
    mass_unit: float = 1.0
    kB: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass_unit", "kB"):
            value = getattr(self, name)
            if not value > 0:
                raise DomainError(f"{name} must be strictly positive, got {value}")

    def mass(self, m: float) -> float:
        """Converts a mass given in mass units into the formula mass."""
        return m * self.mass_unit


HARTREE = UnitsConfig()


@dataclass(frozen=True)
class ThermalPoint:
    """
    Equilibrium temperature of the system with its derived quantities.

    beta is None at T = 0, where the inverse temperature is undefined.
    """

    T: float
    units: UnitsConfig = HARTREE
    beta: Optional[float] = field(init=False)
    mean_energy: float = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.T) or self.T < 0:
            raise DomainError(f"temperature must be finite and >= 0, got {self.T}")
        kT = self.units.kB * self.T
        object.__setattr__(self, "beta", 1.0 / kT if self.T > 0 else None)
        object.__setattr__(self, "mean_energy", 0.5 * kT)

    @classmethod
    def from_temperature(cls, T: float, units: UnitsConfig = HARTREE) -> "ThermalPoint":
        return cls(T=float(T), units=units)

    @property
    def kT(self) -> float:
        return self.units.kB * self.T

    @property
    def is_zero(self) -> bool:
        return self.T == 0

    def require_positive(self) -> "ThermalPoint":
        """
        Guards operations that are only defined for T > 0.

        Return:
            ThermalPoint: self, for chaining
        """
        if self.T <= 0:
            raise DomainError(f"operation requires T > 0, got T={self.T}")
        return self


@dataclass(frozen=True)
class Box:
    """Particle in an infinite 1D well of width L, levels n' = 1..n_states."""

    L: float
    m: float = 1.0
    n_states: int = DEFAULT_N_STATES
    units: UnitsConfig = HARTREE

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError(f"box width L must be > 0, got {self.L}")
        if not self.m > 0:
            raise DomainError(f"mass must be > 0, got {self.m}")
        if self.n_states < 1:
            raise DomainError(f"n_states must be >= 1, got {self.n_states}")

    @property
    def xi(self) -> float:
        """Level spacing constant pi^2 hbar^2 / (2 m L^2)."""
        hbar = self.units.hbar
        return math.pi**2 * hbar**2 / (2.0 * self.units.mass(self.m) * self.L**2)

    @property
    def first_index(self) -> int:
        return 1


@dataclass(frozen=True)
class Free:
    """Free particle on the whole line; continuous spectrum."""

    m: float = 1.0
    units: UnitsConfig = HARTREE

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError(f"mass must be > 0, got {self.m}")


@dataclass(frozen=True)
class Oscillator:
    """1D harmonic oscillator of angular frequency omega, levels n' = 0..n_states-1."""

    omega: float
    m: float = 1.0
    n_states: int = DEFAULT_N_STATES
    units: UnitsConfig = HARTREE

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"angular frequency must be > 0, got {self.omega}")
        if not self.m > 0:
            raise DomainError(f"mass must be > 0, got {self.m}")
        if self.n_states < 1:
            raise DomainError(f"n_states must be >= 1, got {self.n_states}")

    @property
    def first_index(self) -> int:
        return 0


SystemSpec = Union[Box, Free, Oscillator]


@dataclass(frozen=True)
class LevelSet:
    """Finite, ascending list of zero-temperature energies used in partition traces."""

    energies: tuple

    def __post_init__(self):
        energies = tuple(float(e) for e in self.energies)
        if not energies:
            raise DomainError("a level set needs at least one energy")
        if any(b < a for a, b in zip(energies, energies[1:])):
            raise DomainError("level energies must be sorted ascending")
        object.__setattr__(self, "energies", energies)

    @property
    def e_min(self) -> float:
        return self.energies[0]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.energies, dtype=float)

    def shifted(self, c: float) -> "LevelSet":
        """Every level moved by the same scalar c."""
        return LevelSet(tuple(e + c for e in self.energies))

    def __len__(self):
        return len(self.energies)


def x0(spec: Oscillator) -> float:
    """Ground-state length scale sqrt(hbar / (m omega)) of the oscillator."""
    return math.sqrt(spec.units.hbar / (spec.units.mass(spec.m) * spec.omega))


def make_levels(spec: SystemSpec) -> LevelSet:
    """
    Builds the truncated zero-temperature spectrum of a discrete system.

    Return:
        LevelSet: Xi n'^2 for n' = 1..n_states (box) or (n' + 1/2) hbar omega
        for n' = 0..n_states-1 (oscillator)
    """
    if isinstance(spec, Box):
        n = np.arange(1, spec.n_states + 1, dtype=float)
        return LevelSet(tuple(spec.xi * n**2))
    if isinstance(spec, Oscillator):
        n = np.arange(spec.n_states, dtype=float)
        return LevelSet(tuple((n + 0.5) * spec.units.hbar * spec.omega))
    if isinstance(spec, Free):
        raise ContinuumSpectrumError()
    raise DomainError(f"unknown system specification: {spec!r}")


def level_energy(spec: SystemSpec, n: int) -> float:
    """
    Single zero-temperature level E_n(0). The index is not limited by n_states.

    Return:
        float: the energy of mode n
    """
    if isinstance(spec, Box):
        if n < 1:
            raise ModeIndexError(f"box modes start at n=1, got n={n}")
        return spec.xi * n * n
    if isinstance(spec, Oscillator):
        if n < 0:
            raise ModeIndexError(f"oscillator modes start at n=0, got n={n}")
        return (n + 0.5) * spec.units.hbar * spec.omega
    if isinstance(spec, Free):
        raise ContinuumSpectrumError()
    raise DomainError(f"unknown system specification: {spec!r}")


def system_name(spec: SystemSpec) -> str:
    return {Box: "box", Free: "free", Oscillator: "oscillator"}[type(spec)]


def describe(spec: SystemSpec) -> dict:
    """Parameter map of a system, used as CurveTable metadata."""
    if isinstance(spec, Box):
        return {"system": "box", "L": spec.L, "m": spec.m, "n_states": spec.n_states}
    if isinstance(spec, Oscillator):
        return {
            "system": "oscillator",
            "omega": spec.omega,
            "m": spec.m,
            "n_states": spec.n_states,
        }
    return {"system": "free", "m": spec.m}
