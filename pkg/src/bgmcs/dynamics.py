"""Time evolution, auto-correlation and revival periods."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock_algebra import ModelParams, SpinorState, energy_levels
from .mcs_states import CoefficientTable, assemble_state
from .observables import mean_energy

__all__ = [
    "DegenerateBracketError",
    "AutocorrSeries",
    "PeriodEstimate",
    "DEFAULT_TIMES",
    "evolve",
    "autocorrelation",
    "autocorrelation_overlap",
    "spectral_period",
    "revival_times",
    "estimate_period",
]

DEFAULT_TIMES = np.linspace(0.0, 25.0, 5001)
DEFAULT_THRESHOLD = 0.9
# tolerance for "strictly higher than a neighbour"; |C|^2 of a single level
# is 1 up to rounding and must not produce peaks
_PEAK_ATOL = 1e-12


class DegenerateBracketError(ValueError):
    """Mean energy sits at or below a level of its own ladder, so no gap
    strictly brackets it."""


def evolve(table: CoefficientTable, t: float) -> SpinorState:
    """``exp(-i H t)`` applied to the normalized state."""
    state = assemble_state(table)
    phases = np.exp(-1j * energy_levels(state.levels, table.params.omega_c) * t)
    return SpinorState(state.levels, state.amps * phases, normalized=True)


@dataclass(frozen=True)
class AutocorrSeries:
    ts: np.ndarray
    values: np.ndarray
    params: ModelParams

    @property
    def fidelity(self) -> np.ndarray:
        """``|C(t)|^2``."""
        return self.values.real**2 + self.values.imag**2


def autocorrelation(table: CoefficientTable, ts=None) -> AutocorrSeries:
    """``C(t) = sum_n |c_n|^2 exp(-i E_n t)``."""
    if not table.normalized:
        raise ValueError("autocorrelation needs a normalized table")
    ts = DEFAULT_TIMES if ts is None else np.asarray(ts, dtype=np.float64)
    if ts.size == 0:
        raise ValueError("empty time grid")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("time grid must be strictly increasing")
    energies = energy_levels(table.levels, table.params.omega_c)
    values = np.exp(-1j * np.outer(ts, energies)) @ table.weights
    return AutocorrSeries(ts, values, table.params)


def autocorrelation_overlap(table: CoefficientTable, ts) -> np.ndarray:
    """``<psi(0)|psi(t)>`` via explicit evolution; cross-check path."""
    psi0 = assemble_state(table)
    return np.array([np.vdot(psi0.amps, evolve(table, t).amps) for t in np.asarray(ts, dtype=float)])


@dataclass(frozen=True)
class PeriodEstimate:
    tau_spectral: float
    bracket: tuple[int, int]
    mean_energy: float
    tau_correlation: float | None = None
    threshold: float | None = None

    def to_dict(self) -> dict:
        return {
            "tau_spectral": self.tau_spectral,
            "tau_correlation": self.tau_correlation,
            "bracket": list(self.bracket),
            "mean_energy": self.mean_energy,
            "threshold": self.threshold,
        }


def spectral_period(table: CoefficientTable) -> PeriodEstimate:
    """Period ``2 pi / (E_{L+m} - E_L)`` for the ladder gap around ``<H>``.

    Only the state's own levels ``L = m n + j`` are scanned.
    """
    p = table.params
    m, j = p.m_order, p.j_index
    h = mean_energy(table)
    # extend the ladder past the retained levels in case <H> sits above them
    n_top = table.truncation_n + 2
    ladder = m * np.arange(n_top + 1) + j
    energies = energy_levels(ladder, p.omega_c)
    inside = np.flatnonzero((energies[:-1] < h) & (h < energies[1:]))
    if inside.size == 0:
        raise DegenerateBracketError(
            f"<H> = {h!r} is not strictly inside any gap of the ladder {{{m}n+{j}}}"
        )
    i = int(inside[0])
    gap = energies[i + 1] - energies[i]
    return PeriodEstimate(2 * math.pi / gap, (int(ladder[i]), int(ladder[i + 1])), h)


def revival_times(series: AutocorrSeries, threshold: float = DEFAULT_THRESHOLD) -> list[float]:
    """Interior local maxima of ``|C(t)|^2`` above ``threshold``.

    Each peak is refined with a parabola through its three samples.  The
    grid must resolve the shortest expected period ``2 pi / (m omega_c)``
    with at least 50 samples.
    """
    ts = series.ts
    y = series.fidelity
    if ts.size >= 2:
        dt = float(np.max(np.diff(ts)))
        shortest = 2 * math.pi / (series.params.m_order * series.params.omega_c)
        if shortest / dt < 50:
            raise ValueError(
                f"time step {dt:.3g} too coarse: need >= 50 samples per {shortest:.4g}"
            )
    if y.size < 3:
        return []
    mid = y[1:-1]
    # strict rise on the left, no fall on the right: a two-sample flat top
    # counts once
    is_peak = (mid > y[:-2] + _PEAK_ATOL) & (mid >= y[2:] - _PEAK_ATOL) & (mid > threshold)
    out = []
    for i in np.flatnonzero(is_peak) + 1:
        t0, t1, t2 = ts[i - 1], ts[i], ts[i + 1]
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = (t0 - t1) * (t0 - t2) * (t1 - t2)
        a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / denom
        b = (t2**2 * (y0 - y1) + t1**2 * (y2 - y0) + t0**2 * (y1 - y2)) / denom
        t_peak = -b / (2 * a) if a < 0 else t1
        out.append(float(min(max(t_peak, t0), t2)))
    return out


def estimate_period(table: CoefficientTable, ts=None, threshold: float = DEFAULT_THRESHOLD) -> PeriodEstimate:
    """Spectral estimate plus the first auto-correlation revival (``None``
    if no peak clears the threshold)."""
    est = spectral_period(table)
    peaks = revival_times(autocorrelation(table, ts), threshold)
    return PeriodEstimate(est.tau_spectral, est.bracket, est.mean_energy,
                          peaks[0] if peaks else None, threshold)
