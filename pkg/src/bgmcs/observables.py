"""Quadrature moments, uncertainty product and mean energy of an MCS.

The closed forms below sum over the retained coefficients with the matrix
elements written out by hand.  Each has an oracle twin that contracts the
coefficients with :func:`~bgmcs.fock_algebra.spinor_operator_matrix`, i.e.
with operators built from explicit ladder matrices.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .fock_algebra import energy_levels, log_factorials, spinor_operator_matrix
from .mcs_states import CoefficientTable, sector_prefactor

__all__ = [
    "ConsistencyError",
    "ObservableReport",
    "Uncertainty",
    "mean_S",
    "mean_S2",
    "mean_S2_oracle",
    "uncertainty_product",
    "mean_energy",
    "mean_energy_oracle",
    "observable_report",
]

ORACLE_RTOL = 1e-10
VARIANCE_ATOL = 1e-12


class ConsistencyError(RuntimeError):
    """Closed form and ladder oracle disagree."""


class Uncertainty(NamedTuple):
    sigma_q: float
    sigma_p: float
    product: float


@dataclass(frozen=True)
class ObservableReport:
    mean_S: tuple[float, float]
    mean_S2: tuple[float, float]
    sigma_q: float
    sigma_p: float
    product: float
    mean_energy: float

    def to_dict(self) -> dict:
        return asdict(self)


def _require_normalized(table: CoefficientTable):
    if not table.normalized:
        raise ValueError("observables need a normalized table")


def _oracle_expectation(table: CoefficientTable, op: str, k: int = 0) -> complex:
    mat = spinor_operator_matrix(table.levels, op, k, table.params.omega_c)
    c = table.coeffs
    return complex(np.conj(c) @ mat @ c)


def _check(name: str, closed: float, oracle: float):
    scale = max(abs(closed), abs(oracle), 1e-300)
    if abs(closed - oracle) > ORACLE_RTOL * scale:
        raise ConsistencyError(f"{name}: closed form {closed!r} vs oracle {oracle!r}")


def mean_S(table: CoefficientTable, k: int) -> float:
    """``<S_k>``; only adjacent levels couple, so this vanishes for m >= 2."""
    _require_normalized(table)
    return _oracle_expectation(table, "S", k).real


def _diag_S2(levels: np.ndarray) -> np.ndarray:
    # <Psi_L| s_k^2 |Psi_L>: (2L+1)/2 on the lower component alone, else the
    # average of (2L-3)/2 and (2L+1)/2
    lv = levels.astype(np.float64)
    return np.where(levels >= 2, (2 * lv - 1) / 2, (2 * lv + 1) / 2)


def _offdiag_S2(levels: np.ndarray) -> np.ndarray:
    # <Psi_L| (a^2 + a+^2) / 2 |Psi_{L+2}> without the (-1)^k sign
    lv = levels.astype(np.float64)
    upper = np.where(levels >= 2, np.sqrt(lv * (lv - 1)), 0.0)
    lower = np.sqrt((lv + 1) * (lv + 2))
    norm = np.where(levels >= 2, 0.5, 1 / math.sqrt(2.0))
    return 0.5 * norm * (upper + lower)


def mean_S2(table: CoefficientTable, k: int, check: bool = False) -> float:
    """``<S_k^2>`` from the closed-form series.

    Diagonal terms plus, for sectors whose levels are two apart (m = 2, and
    next-nearest terms of m = 1), the ``(-1)^k`` squeezing cross terms.
    With ``check`` the ladder oracle is evaluated too and a mismatch beyond
    relative 1e-10 raises :class:`ConsistencyError`.
    """
    _require_normalized(table)
    if k not in (0, 1):
        raise ValueError(f"k must be 0 or 1, got {k}")
    c = table.coeffs
    levels = table.levels
    value = float(np.sum(np.abs(c) ** 2 * _diag_S2(levels)))
    step = {1: 2, 2: 1}.get(table.params.m_order)
    if step is not None and c.size > step:
        cross = np.conj(c[:-step]) * c[step:] * _offdiag_S2(levels[:-step])
        value += (-1) ** k * 2.0 * float(np.sum(cross.real))
    if check:
        _check(f"<S_{k}^2>", value, mean_S2_oracle(table, k))
    return value


def mean_S2_oracle(table: CoefficientTable, k: int) -> float:
    _require_normalized(table)
    return _oracle_expectation(table, "S2", k).real


def _sigma(var: float) -> float:
    if var < -VARIANCE_ATOL:
        raise ConsistencyError(f"negative variance {var!r}")
    return math.sqrt(max(var, 0.0))


def uncertainty_product(table: CoefficientTable, check: bool = False) -> Uncertainty:
    sq = _sigma(mean_S2(table, 0, check) - mean_S(table, 0) ** 2)
    sp = _sigma(mean_S2(table, 1, check) - mean_S(table, 1) ** 2)
    return Uncertainty(sq, sp, sq * sp)


def mean_energy(table: CoefficientTable, check: bool = False) -> float:
    """``<H>`` from the closed-form sector series, in units of hbar.

    With ``check`` it is compared with ``sum |c|^2 E_level`` and the
    Hamiltonian ladder oracle.
    """
    _require_normalized(table)
    p = table.params
    m, j = p.m_order, p.j_index
    ns = np.arange(1, table.coeffs.size)
    levels = m * ns + j
    lf = p.weight.log_fact
    if m == 1:
        # the n = 1 term lacks the factor 2 but carries zero energy
        pref2 = 2.0
    else:
        pref2 = sector_prefactor(j) ** 2
    # norm_const^2 goes into the exponent; the bare series overflows at large |alpha|
    log_terms = (
        2.0 * (lf(j) - lf(levels)) + 2 * ns * math.log(p.r if p.r > 0 else 1.0)
        - log_factorials(levels) + 2.0 * math.log(table.norm_const)
    )
    series = float(np.sum(np.sqrt(levels * (levels - 1.0)) * np.exp(log_terms))) if ns.size else 0.0
    value = p.omega_c * (table.norm_const**2 * math.sqrt(j * (j - 1)) + pref2 * series)
    if check:
        direct = float(np.sum(table.weights * energy_levels(table.levels, p.omega_c)))
        _check("<H>", value, direct)
        _check("<H> (oracle)", value, mean_energy_oracle(table))
    return value


def mean_energy_oracle(table: CoefficientTable) -> float:
    _require_normalized(table)
    return _oracle_expectation(table, "H").real


def observable_report(table: CoefficientTable, check: bool = False) -> ObservableReport:
    s = (mean_S(table, 0), mean_S(table, 1))
    s2 = (mean_S2(table, 0, check), mean_S2(table, 1, check))
    sq = _sigma(s2[0] - s[0] ** 2)
    sp = _sigma(s2[1] - s[1] ** 2)
    return ObservableReport(s, s2, sq, sp, sq * sp, mean_energy(table, check))
