"""Oscillator eigenfunctions and MCS position densities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import evolve
from .fock_algebra import ModelParams, SpinorState
from .mcs_states import CoefficientTable, assemble_state

__all__ = [
    "OscillatorBasis",
    "DensityGrid",
    "hermite_psi",
    "hermite_table",
    "default_grid",
    "density",
    "static_density",
]


@dataclass(frozen=True)
class OscillatorBasis:
    """Normalized eigenfunctions ``psi_n`` in ``xi = sqrt(scale) (x - center)``.

    ``scale`` is the Gaussian exponent parameter (``omega_c`` in hbar = m* = 1
    units by default, see :meth:`for_params`).
    """

    center: float = 0.0
    scale: float = 1.0
    n_max: int = 256

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")

    @classmethod
    def for_params(cls, params: ModelParams, scale: float | None = None, n_max: int | None = None) -> "OscillatorBasis":
        """Basis centred on ``x0 = -2 k / omega_c``."""
        return cls(
            center=-2.0 * params.k / params.omega_c,
            scale=params.omega_c if scale is None else scale,
            n_max=params.n_cap if n_max is None else n_max,
        )

    def width(self, n: int) -> float:
        """Standard deviation of ``|psi_n|^2``."""
        return math.sqrt((2 * n + 1) / (2 * self.scale))


def hermite_table(basis: OscillatorBasis, n_top: int, x) -> np.ndarray:
    """Rows ``psi_0 .. psi_{n_top}`` evaluated at ``x``.

    Uses the normalized three-term recurrence, so neither Hermite
    polynomials nor factorials are formed.
    """
    if n_top > basis.n_max:
        raise ValueError(f"n = {n_top} exceeds basis n_max = {basis.n_max}")
    if n_top < 0:
        raise ValueError("n must be >= 0")
    xi = math.sqrt(basis.scale) * (np.asarray(x, dtype=np.float64) - basis.center)
    out = np.empty((n_top + 1,) + xi.shape)
    out[0] = (basis.scale / math.pi) ** 0.25 * np.exp(-0.5 * xi * xi)
    if n_top >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, n_top):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_psi(basis: OscillatorBasis, n: int, x):
    """``psi_n(x)``; scalar in, scalar out."""
    val = hermite_table(basis, n, x)[n]
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class DensityGrid:
    xs: np.ndarray
    rho: np.ndarray
    t: float = 0.0
    params: ModelParams | None = field(default=None, compare=False)

    def integral(self) -> float:
        return float(np.trapezoid(self.rho, self.xs))

    def metadata(self) -> dict:
        p = self.params
        meta = {"t": self.t}
        if p is not None:
            meta.update(m=p.m_order, j=p.j_index, r=p.r, theta=p.theta, omega_c=p.omega_c, k=p.k)
        return meta


def default_grid(table: CoefficientTable, basis: OscillatorBasis, n_points: int = 2001) -> np.ndarray:
    """``x0 +- 8 sqrt((2 n_top + 1) / scale)`` with ``n_top`` the top level."""
    n_top = int(table.levels[-1])
    half = 8.0 * math.sqrt((2 * n_top + 1) / basis.scale)
    return np.linspace(basis.center - half, basis.center + half, n_points)


def _spinor_density(state: SpinorState, basis: OscillatorBasis, xs: np.ndarray) -> np.ndarray:
    levels = state.levels
    if levels.size == 0:
        return np.zeros_like(xs)
    psi = hermite_table(basis, int(levels[-1]), xs)
    upper_mask = levels >= 2
    norm = np.where(upper_mask, 1.0 / math.sqrt(2.0), 1.0)
    lower = (state.amps * norm) @ psi[levels]
    if np.any(upper_mask):
        upper = (state.amps[upper_mask] * norm[upper_mask]) @ psi[levels[upper_mask] - 2]
    else:
        upper = np.zeros_like(lower)
    return upper.real**2 + upper.imag**2 + lower.real**2 + lower.imag**2


def density(table: CoefficientTable, basis: OscillatorBasis, xs=None, t: float = 0.0) -> DensityGrid:
    """Position density of the state evolved to time ``t``.

    Each spinor component's amplitude is summed first and then squared.
    """
    xs = default_grid(table, basis) if xs is None else np.asarray(xs, dtype=np.float64)
    state = evolve(table, t)
    return DensityGrid(xs, _spinor_density(state, basis, xs), float(t), table.params)


def static_density(table: CoefficientTable, basis: OscillatorBasis, xs=None) -> DensityGrid:
    """Density of the unevolved state."""
    xs = default_grid(table, basis) if xs is None else np.asarray(xs, dtype=np.float64)
    return DensityGrid(xs, _spinor_density(assemble_state(table), basis, xs), 0.0, table.params)
