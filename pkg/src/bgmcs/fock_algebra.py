"""Ladder algebra for the bilayer eigenspinors.

Each eigenspinor ``Psi_n`` carries the oscillator Fock state ``|n-2>`` in its
upper component and ``|n>`` in its lower one::

    Psi_0 = (0, |0>),   Psi_1 = (0, |1>),   Psi_n = (|n-2>, |n>) / sqrt(2)  (n >= 2)

Units are hbar = 1 throughout, so energies are in units of the cyclotron
frequency ``omega_c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "DEFAULT_N_CAP",
    "WeightFunction",
    "ModelParams",
    "SpinorState",
    "log_factorial",
    "log_factorials",
    "energy_level",
    "energy_levels",
    "annihilation_log_coefficient",
    "annihilate_power",
    "spinor_operator_matrix",
    "spinor_matrix_element",
]

DEFAULT_N_CAP = 256
_EXACT_FACTORIAL_MAX = 20


def log_factorial(n: int) -> float:
    """Return ``log(n!)``.

    Exact (correctly rounded log of the integer factorial) for ``n <= 20``,
    ``lgamma(n + 1)`` beyond, so nothing overflows.
    """
    n = int(n)
    if n < 0:
        raise ValueError(f"log_factorial needs n >= 0, got {n}")
    if n <= _EXACT_FACTORIAL_MAX:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1)


@lru_cache(maxsize=8)
def _log_factorial_table(n_max: int) -> np.ndarray:
    table = np.array([log_factorial(n) for n in range(n_max + 1)])
    table.setflags(write=False)
    return table


def log_factorials(ns) -> np.ndarray:
    """Vectorised :func:`log_factorial` over an integer array."""
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size == 0:
        return np.zeros(ns.shape)
    if ns.min() < 0:
        raise ValueError("log_factorials needs nonnegative arguments")
    # round the table size up so the cache is reused across calls
    size = max(64, 1 << int(ns.max()).bit_length())
    return _log_factorial_table(size)[ns]


def energy_level(n: int, omega_c: float = 1.0) -> float:
    """Landau level ``E_n = omega_c * sqrt(n (n - 1))``; ``E_0 = E_1 = 0``."""
    if n < 0:
        raise ValueError(f"level must be >= 0, got {n}")
    if n < 2:
        return 0.0
    return omega_c * math.sqrt(n * (n - 1))


def energy_levels(levels, omega_c: float = 1.0) -> np.ndarray:
    levels = np.asarray(levels, dtype=np.float64)
    return omega_c * np.sqrt(np.clip(levels * (levels - 1.0), 0.0, None))


@dataclass(frozen=True)
class WeightFunction:
    """The positive deformation function ``f(n)``, n >= 1.

    ``kind`` is ``"constant-one"`` (f = 1 everywhere, unbounded) or
    ``"user-table"`` with ``values = (f(1), f(2), ...)``.  The generalized
    factorial ``[f(n)]! = f(1)...f(n)`` is kept as a log table.
    """

    kind: str = "constant-one"
    values: tuple[float, ...] = ()
    _log_fact: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "constant-one":
            if self.values:
                raise ValueError("constant-one weight takes no values")
            log_fact = np.zeros(1)
        elif self.kind == "user-table":
            vals = np.asarray(self.values, dtype=np.float64)
            if vals.ndim != 1 or vals.size == 0:
                raise ValueError("user-table weight needs at least one value")
            if not np.all(np.isfinite(vals)):
                raise ValueError("weight values must be finite")
            if np.any(vals == 0.0):
                bad = int(np.flatnonzero(vals == 0.0)[0]) + 1
                raise ValueError(f"weight f({bad}) = 0 is not allowed")
            if np.any(vals < 0.0):
                raise ValueError("weight values must be positive")
            object.__setattr__(self, "values", tuple(float(v) for v in vals))
            log_fact = np.concatenate(([0.0], np.cumsum(np.log(vals))))
        else:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        log_fact.setflags(write=False)
        object.__setattr__(self, "_log_fact", log_fact)

    @classmethod
    def constant_one(cls) -> "WeightFunction":
        return cls()

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "WeightFunction":
        return cls("user-table", tuple(values))

    @classmethod
    def from_callable(cls, func: Callable[[int], float], n_max: int) -> "WeightFunction":
        """Tabulate ``func(1) .. func(n_max)``."""
        return cls("user-table", tuple(float(func(n)) for n in range(1, n_max + 1)))

    @property
    def max_level(self) -> float:
        """Largest n for which ``[f(n)]!`` is defined."""
        if self.kind == "constant-one":
            return math.inf
        return len(self.values)

    def __call__(self, n: int) -> float:
        if n < 1:
            raise ValueError("f(n) is defined for n >= 1")
        if self.kind == "constant-one":
            return 1.0
        if n > len(self.values):
            raise ValueError(f"weight table ends at f({len(self.values)}); f({n}) requested")
        return self.values[n - 1]

    def log_fact(self, n) -> np.ndarray | float:
        """``log [f(n)]!`` for a scalar or an integer array."""
        n_arr = np.asarray(n, dtype=np.int64)
        if n_arr.size and n_arr.min() < 0:
            raise ValueError("[f(n)]! needs n >= 0")
        if self.kind == "constant-one":
            out = np.zeros(n_arr.shape)
        else:
            if n_arr.size and n_arr.max() > len(self.values):
                raise ValueError(
                    f"weight table ends at f({len(self.values)}); "
                    f"[f({int(n_arr.max())})]! requested"
                )
            out = self._log_fact[n_arr]
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        if self.kind == "constant-one":
            return {"kind": self.kind}
        return {"kind": self.kind, "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "WeightFunction":
        return cls(data["kind"], tuple(data.get("values", ())))


@dataclass(frozen=True)
class ModelParams:
    """Physical and construction parameters of one MCS sector.

    ``alpha`` is the complex eigenvalue of the m-th power annihilator,
    ``j_index`` picks the sector ``{m n + j}``.  ``tol`` is the relative
    amplitude at which the coefficient series is cut; ``n_cap`` is the
    highest eigenspinor level the construction may touch.
    """

    m_order: int
    j_index: int = 0
    alpha: complex = 0j
    omega_c: float = 1.0
    k: float = 0.0
    weight: WeightFunction = field(default_factory=WeightFunction)
    tol: float = 1e-14
    n_cap: int = DEFAULT_N_CAP

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if int(self.m_order) != self.m_order or self.m_order < 1:
            raise ValueError(f"m must be an integer >= 1, got {self.m_order}")
        if int(self.j_index) != self.j_index or not 0 <= self.j_index < self.m_order:
            raise ValueError(f"invalid (m, j) pair ({self.m_order}, {self.j_index}): need 0 <= j < m")
        object.__setattr__(self, "m_order", int(self.m_order))
        object.__setattr__(self, "j_index", int(self.j_index))
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be positive, got {self.omega_c}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.n_cap < self.m_order + 2:
            raise ValueError(f"n_cap must be >= m + 2 = {self.m_order + 2}, got {self.n_cap}")
        if not (math.isfinite(self.alpha.real) and math.isfinite(self.alpha.imag)):
            raise ValueError("alpha must be finite")

    @classmethod
    def polar(cls, m_order: int, j_index: int, r: float, theta: float = 0.0, **kwargs) -> "ModelParams":
        if r < 0:
            raise ValueError(f"r must be >= 0, got {r}")
        return cls(m_order, j_index, complex(r * math.cos(theta), r * math.sin(theta)), **kwargs)

    @property
    def r(self) -> float:
        return abs(self.alpha)

    @property
    def theta(self) -> float:
        return math.atan2(self.alpha.imag, self.alpha.real)

    def to_dict(self) -> dict:
        return {
            "m": self.m_order,
            "j": self.j_index,
            "alpha": [self.alpha.real, self.alpha.imag],
            "omega_c": self.omega_c,
            "k": self.k,
            "weight": self.weight.to_dict(),
            "tol": self.tol,
            "n_cap": self.n_cap,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        re, im = data["alpha"]
        return cls(
            m_order=data["m"],
            j_index=data["j"],
            alpha=complex(re, im),
            omega_c=data["omega_c"],
            k=data["k"],
            weight=WeightFunction.from_dict(data["weight"]),
            tol=data["tol"],
            n_cap=data["n_cap"],
        )


@dataclass(frozen=True)
class SpinorState:
    """Finite superposition ``sum_i amps[i] * Psi_{levels[i]}``."""

    levels: np.ndarray
    amps: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.int64).reshape(-1)
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        if levels.shape != amps.shape:
            raise ValueError("levels and amps differ in length")
        if levels.size and levels.min() < 0:
            raise ValueError("levels must be nonnegative")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("levels must be strictly increasing")
        if self.normalized:
            err = abs(float(np.sum(np.abs(amps) ** 2)) - 1.0)
            if err > 10 * np.finfo(float).eps * max(levels.size, 1):
                raise ValueError(f"state flagged normalized but |norm^2 - 1| = {err:.3g}")
        levels.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, n: int, amp: complex = 1.0) -> "SpinorState":
        return cls(np.array([n]), np.array([amp]), normalized=abs(amp) == 1.0)

    @classmethod
    def zero(cls) -> "SpinorState":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.complex128))

    def __len__(self) -> int:
        return int(self.levels.size)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def amplitude(self, n: int) -> complex:
        idx = np.searchsorted(self.levels, n)
        if idx < self.levels.size and self.levels[idx] == n:
            return complex(self.amps[idx])
        return 0j

    def dense(self, n_max: int) -> np.ndarray:
        """Amplitudes on levels ``0..n_max`` (zeros where absent)."""
        out = np.zeros(n_max + 1, dtype=np.complex128)
        keep = self.levels <= n_max
        out[self.levels[keep]] = self.amps[keep]
        return out


def annihilation_log_coefficient(n: int, m: int, weight: WeightFunction) -> float:
    """``log a_n`` where ``A_g Psi_n = a_n Psi_{n-m}``; ``-inf`` when n < m."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if n < m:
        return -math.inf
    lf = weight.log_fact
    if n == m:
        return 0.5 * (math.log(1 + (m == 1)) + log_factorial(n) - math.log(2.0)) + lf(n)
    if n == m + 1:
        return 0.5 * (log_factorial(n) - math.log(2.0)) + lf(n) - lf(1)
    return 0.5 * (log_factorial(n) - log_factorial(n - m)) + lf(n) - lf(n - m)


def annihilate_power(state: SpinorState, m: int, weight: WeightFunction) -> SpinorState:
    """Apply the generalized annihilator ``A_g = (A^-)^m`` term by term."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    keep = state.levels >= m
    levels = state.levels[keep]
    if levels.size == 0:
        return SpinorState.zero()
    log_a = np.array([annihilation_log_coefficient(int(n), m, weight) for n in levels])
    return SpinorState(levels - m, state.amps[keep] * np.exp(log_a))


# --- brute-force ladder oracle --------------------------------------------

def _ladder(dim: int) -> np.ndarray:
    """Lowering operator on Fock states ``0..dim-1`` (dense)."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=np.float64)), k=1)


def _fock_operator(op: str, k: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the (upper, lower) diagonal blocks of a block-diagonal operator
    on the two spinor components; the Hamiltonian is handled separately."""
    a = _ladder(dim)
    ad = a.T
    sign = (-1) ** k
    if op == "S":
        s = (a + sign * ad) / (math.sqrt(2.0) * (1j ** k))
    elif op == "S2":
        number = ad @ a
        s = 0.5 * (2 * number + np.eye(dim) + sign * (a @ a + ad @ ad))
    else:
        raise ValueError(f"unknown operator {op!r}")
    return s.astype(np.complex128), s.astype(np.complex128)


def _embedding(levels: Sequence[int], dim: int) -> np.ndarray:
    """Columns are the eigenspinors in the doubled Fock space (upper ++ lower)."""
    vecs = np.zeros((2 * dim, len(levels)))
    for col, n in enumerate(levels):
        if n >= 2:
            vecs[n - 2, col] = 1.0 / math.sqrt(2.0)
            vecs[dim + n, col] = 1.0 / math.sqrt(2.0)
        else:
            vecs[dim + n, col] = 1.0
    return vecs


def spinor_operator_matrix(levels: Sequence[int], op: str, k: int = 0, omega_c: float = 1.0) -> np.ndarray:
    """Matrix ``<Psi_a| Op |Psi_b>`` over the given levels, by explicit ladder
    algebra in a truncated Fock space large enough to be exact.

    ``op`` is ``"S"`` (s_k on both components), ``"S2"`` (s_k^2 on both
    components) or ``"H"`` (``omega_c * [[0, b^2], [b+^2, 0]]``).
    """
    if k not in (0, 1):
        raise ValueError(f"k must be 0 or 1, got {k}")
    levels = [int(n) for n in levels]
    dim = (max(levels) if levels else 0) + 4
    if op == "H":
        a = _ladder(dim)
        full = np.zeros((2 * dim, 2 * dim), dtype=np.complex128)
        full[:dim, dim:] = omega_c * (a @ a)
        full[dim:, :dim] = omega_c * (a.T @ a.T)
    else:
        upper, lower = _fock_operator(op, k, dim)
        full = np.zeros((2 * dim, 2 * dim), dtype=np.complex128)
        full[:dim, :dim] = upper
        full[dim:, dim:] = lower
    vecs = _embedding(levels, dim)
    return vecs.T @ full @ vecs


def spinor_matrix_element(n: int, n_prime: int, op: str, k: int = 0, omega_c: float = 1.0) -> complex:
    """``<Psi_n| Op |Psi_n'>`` from the ladder oracle."""
    if n < 0 or n_prime < 0:
        raise ValueError("levels must be nonnegative")
    mat = spinor_operator_matrix([n, n_prime], op, k, omega_c)
    return complex(mat[0, 1] if n != n_prime else mat[0, 0])
