"""Multiphoton coherent state coefficients.

For a sector ``(m, j)`` the state is ``sum_n C_{mn+j} Psi_{mn+j}`` with, for
``m >= 2`` and ``n >= 1``::

    C_{mn+j} / C_j = P_j [f(j)]! alpha^n / (sqrt((mn+j)!) [f(mn+j)]!)

where ``P_j = sqrt(2)`` for ``j in {0, 1}`` and ``sqrt(j!)`` for ``j >= 2``.
For ``m = 1`` (only ``j = 0``) the ratio is
``sqrt(2^(1 - delta_{1n}) / n!) alpha^n / [f(n)]!``.

All magnitudes are accumulated in log space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .fock_algebra import ModelParams, SpinorState, annihilate_power, log_factorials

__all__ = [
    "TruncationError",
    "CoefficientTable",
    "sector_prefactor",
    "log_coefficients",
    "build_coefficients",
    "normalize",
    "coherent_table",
    "assemble_state",
    "eigen_residual",
]


# keeps squared ratios and their sums finite
_LOG_MAX = 600.0


class TruncationError(RuntimeError):
    """The coefficient series did not converge below the level ceiling."""


def sector_prefactor(j: int) -> float:
    """Constant ``P_j`` multiplying every n >= 1 coefficient of sector j."""
    if j in (0, 1):
        return math.sqrt(2.0)
    return math.sqrt(math.factorial(j))


def log_coefficients(params: ModelParams, n_max: int) -> np.ndarray:
    """``log |C_{mn+j} / C_j|`` for ``n = 0..n_max`` (requires ``alpha != 0``)."""
    m, j = params.m_order, params.j_index
    ns = np.arange(n_max + 1)
    levels = m * ns + j
    log_r = math.log(params.r)
    w = params.weight
    if m == 1:
        log_two = np.where(ns == 1, 0.0, math.log(2.0))
        out = 0.5 * (log_two - log_factorials(levels)) + ns * log_r - w.log_fact(levels)
    else:
        out = (
            math.log(sector_prefactor(j)) + w.log_fact(j) + ns * log_r
            - 0.5 * log_factorials(levels) - w.log_fact(levels)
        )
    out[0] = 0.0
    return out


@dataclass(frozen=True)
class CoefficientTable:
    """Truncated coefficients of one MCS sector.

    ``coeffs[n]`` multiplies ``Psi_{levels[n]}`` with ``levels = m n + j``.
    Before :func:`normalize` they are the ratios ``C_{mn+j} / C_j``;
    ``norm_const`` is ``C_j`` itself.  ``tail_bound`` bounds the discarded
    squared mass, in the same scale as ``coeffs``.
    """

    params: ModelParams
    coeffs: np.ndarray
    norm_const: float
    tail_bound: float
    normalized: bool = False

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if coeffs.size == 0:
            raise ValueError("a coefficient table needs at least one entry")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def ns(self) -> np.ndarray:
        return np.arange(self.coeffs.size)

    @property
    def levels(self) -> np.ndarray:
        return self.params.m_order * self.ns + self.params.j_index

    @property
    def truncation_n(self) -> int:
        return self.coeffs.size - 1

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    def entries(self) -> list[tuple[int, int, complex]]:
        return [(int(n), int(lv), complex(c)) for n, lv, c in zip(self.ns, self.levels, self.coeffs)]

    def with_params(self, **changes) -> "CoefficientTable":
        return replace(self, params=replace(self.params, **changes))

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "entries": [[n, lv, c.real, c.imag] for n, lv, c in self.entries()],
            "norm_const": self.norm_const,
            "tail_bound": self.tail_bound,
            "normalized": self.normalized,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "CoefficientTable":
        params = ModelParams.from_dict(data["params"])
        entries = data["entries"]
        for i, (n, lv, _, _) in enumerate(entries):
            if n != i or lv != params.m_order * n + params.j_index:
                raise ValueError(f"entry {i} has inconsistent index/level ({n}, {lv})")
        coeffs = np.array([complex(re, im) for _, _, re, im in entries])
        return cls(params, coeffs, float(data["norm_const"]), float(data["tail_bound"]),
                   bool(data.get("normalized", True)))

    @classmethod
    def from_json(cls, text: str) -> "CoefficientTable":
        return cls.from_dict(json.loads(text))


def _truncated_logs(params: ModelParams):
    """Log coefficients up to the cut, the log running norm there and the
    log tail bound."""
    m, j = params.m_order, params.j_index
    top_level = params.n_cap
    if params.weight.max_level < top_level:
        top_level = int(params.weight.max_level)
    n_avail = (top_level - j) // m
    if n_avail < 1:
        raise TruncationError(f"no room for any term below level {top_level}")

    logc = log_coefficients(params, n_avail)
    log_t = 2.0 * logc
    log_run = np.logaddexp.accumulate(log_t)
    log_q = np.empty_like(log_t)
    log_q[:-1] = log_t[1:] - log_t[:-1]
    log_q[-1] = np.inf  # successor unknown beyond the cap
    limit = 2.0 * math.log(params.tol) + log_run
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_tail = log_t + log_q - np.log(-np.expm1(log_q))
    ok = (np.arange(log_t.size) >= 3) & (log_t < limit) & (log_q < 0) & (log_tail < limit)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        raise TruncationError(
            f"series for (m={m}, j={j}, |alpha|={params.r:.6g}) not converged below "
            f"level {top_level}; raise n_cap or lower |alpha|"
        )
    cut = int(hits[0])
    return logc[: cut + 1], float(log_run[cut]), float(log_tail[cut])


def _phases(params: ModelParams, count: int) -> np.ndarray:
    phases = np.exp(1j * params.theta * np.arange(count))
    phases[0] = 1.0
    return phases


def build_coefficients(params: ModelParams) -> CoefficientTable:
    """Unnormalized coefficient table for ``params``.

    The series is cut at the first ``n >= 3`` where both the amplitude and
    the geometric tail bound ``q t_n / (1 - q)`` (``q < 1`` the successor
    ratio of ``t_n = |C_n|^2``) drop below ``tol`` times the running norm.
    The bound holds for weights with nondecreasing ``n f(n)^2``.

    Raises
    ------
    TruncationError
        If the cut is not reached with levels below ``params.n_cap`` (or
        within the weight table), or if the ratios overflow a double; use
        :func:`coherent_table` for such states.
    """
    if params.alpha == 0:
        return CoefficientTable(params, np.array([1.0 + 0j]), 1.0, 0.0)
    return _unnormalized(params, *_truncated_logs(params))


def _ratio_products(params: ModelParams, count: int) -> np.ndarray:
    """``C_{mn+j} / C_j`` as running products of single steps.

    Exponentiating the log series loses about ``|log C| * eps``; the product
    keeps the relative error near ``sqrt(n) * eps``.
    """
    m, j = params.m_order, params.j_index
    alpha = params.alpha
    w = params.weight
    steps = np.empty(count - 1, dtype=np.complex128)
    first = log_coefficients(params, 1)[1] - math.log(params.r)
    steps[0] = alpha * math.exp(first)
    for n in range(2, count):
        low = m * (n - 1) + j
        scale = 1.0
        for level in range(low + 1, low + m + 1):
            scale *= math.sqrt(level) * w(level)
        steps[n - 1] = alpha / scale
    if m == 1 and count > 2:
        # C_1 lacks the sqrt(2) carried by every later term
        steps[1] *= math.sqrt(2.0)
    return np.concatenate(([1.0 + 0j], np.cumprod(steps)))


def _unnormalized(params, logc, log_run, log_tail) -> CoefficientTable:
    if log_run > _LOG_MAX:
        raise TruncationError(
            f"unnormalized ratios for |alpha|={params.r:.6g} overflow; build the normalized table"
        )
    coeffs = _ratio_products(params, logc.size)
    return CoefficientTable(params, coeffs, math.exp(-0.5 * log_run), math.exp(log_tail))


def normalize(table: CoefficientTable) -> CoefficientTable:
    """Scale a table to unit norm; a normalized table is returned unchanged."""
    if table.normalized:
        return table
    scale = float(np.max(np.abs(table.coeffs)))
    norm = scale * math.sqrt(float(np.sum(np.abs(table.coeffs / scale) ** 2)))
    coeffs = table.coeffs / norm
    return CoefficientTable(table.params, coeffs, 1.0 / norm, table.tail_bound / norm**2, True)


def coherent_table(params: ModelParams) -> CoefficientTable:
    """Normalized table, the usual entry point.

    Large ``|alpha|`` is normalized directly from the log coefficients.
    """
    if params.alpha == 0:
        return normalize(build_coefficients(params))
    logc, log_run, log_tail = _truncated_logs(params)
    if log_run <= _LOG_MAX:
        return normalize(_unnormalized(params, logc, log_run, log_tail))
    log_norm = -0.5 * log_run
    norm_const = math.exp(log_norm)
    if norm_const == 0.0:
        raise TruncationError(f"normalization constant underflows at |alpha|={params.r:.6g}")
    coeffs = np.exp(logc + log_norm) * _phases(params, logc.size)
    fix = math.sqrt(float(np.sum(np.abs(coeffs) ** 2)))
    return CoefficientTable(params, coeffs / fix, norm_const / fix,
                            math.exp(log_tail + 2 * log_norm) / fix**2, True)


def assemble_state(table: CoefficientTable) -> SpinorState:
    if not table.normalized:
        raise ValueError("assemble_state needs a normalized table")
    return SpinorState(table.levels, table.coeffs, normalized=True)


def eigen_residual(state: SpinorState, params: ModelParams) -> float:
    """Relative residual of ``A_g psi = alpha psi`` over the coefficient vector.

    Absolute when ``alpha == 0``.
    """
    image = annihilate_power(state, params.m_order, params.weight)
    top = int(max(state.levels.max(initial=0), image.levels.max(initial=0)))
    diff = image.dense(top) - params.alpha * state.dense(top)
    res = float(np.linalg.norm(diff))
    if params.alpha == 0:
        return res
    return res / (abs(params.alpha) * state.norm())
