"""NIMFA SIS epidemics: metastable fixed point, threshold, transient ODE."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from vspc._kernels import nimfa_fixed_point
from vspc.graph import ConvergenceError, Graph, spectral_radius

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1_000_000
# tau * lambda_1 at or below this counts as sub-threshold (exact zero solution)
THRESHOLD_SLACK = 1e-12


class ThresholdUndefined(ValueError):
    """The graph has no links, so lambda_1 = 0 and 1/lambda_1 is undefined."""


class UnstableStep(RuntimeError):
    """An explicit Euler step pushed a probability outside [0, 1]."""


@dataclass(frozen=True)
class EpidemicParams:
    """Effective infection rate ``tau = beta / delta``.

    ``beta`` and ``delta`` are only needed by :func:`transient_solve`; when
    omitted they default to ``beta = tau``, ``delta = 1``.
    """

    tau: float
    beta: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if (self.beta is None) != (self.delta is None):
            raise ValueError("beta and delta must be given together")
        if self.beta is not None:
            if not (self.beta > 0 and self.delta > 0):
                raise ValueError("beta and delta must be positive")
            if abs(self.beta / self.delta - self.tau) >= 1e-12:
                raise ValueError("tau must equal beta/delta")

    @classmethod
    def from_rates(cls, beta: float, delta: float) -> EpidemicParams:
        return cls(beta / delta, beta, delta)

    @property
    def rates(self) -> tuple[float, float]:
        if self.beta is None:
            return self.tau, 1.0
        return self.beta, self.delta


@dataclass(frozen=True)
class SteadyState:
    v: np.ndarray
    converged: bool
    iterations: int
    residual: float
    below_threshold: bool = False

    @property
    def total(self) -> float:
        return float(self.v.sum())


def _as_params(p) -> EpidemicParams:
    return p if isinstance(p, EpidemicParams) else EpidemicParams(float(p))


def fixed_point_map(g: Graph, tau: float, v: np.ndarray) -> np.ndarray:
    """The metastable-state map ``F(v)_i = 1 - 1/(1 + tau * sum_j a_ij v_j)``."""
    return 1.0 - 1.0 / (1.0 + tau * (g.adjacency @ v))


def steady_state(g: Graph, p: EpidemicParams | float, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> SteadyState:
    """Metastable infection probabilities by fixed-point iteration from all-ones.

    From ``v = 1`` the iterates decrease monotonically onto the largest fixed
    point. When ``tau * lambda_1 <= 1`` that point is the origin and exact
    zeros are returned without iterating.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    tau = _as_params(p).tau
    n = g.n
    if g.link_count == 0 or tau * spectral_radius(g) <= 1.0 + THRESHOLD_SLACK:
        return SteadyState(np.zeros(n), True, 0, 0.0, below_threshold=True)
    v = np.ones(n)
    iters, res, ok = nimfa_fixed_point(g.adjacency, tau, v, tol, max_iter)
    v.setflags(write=False)
    return SteadyState(v, bool(ok), int(iters), float(res))


def epidemic_threshold(g: Graph) -> float:
    lam = spectral_radius(g)
    if lam == 0.0:
        raise ThresholdUndefined("graph without links has no epidemic threshold")
    return 1.0 / lam


def total_infection(g: Graph, p: EpidemicParams | float, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER) -> float:
    ss = steady_state(g, p, tol, max_iter)
    if not ss.converged:
        raise ConvergenceError(f"steady state residual {ss.residual:.3g}", ss.iterations)
    return ss.total


def transient_solve(g: Graph, p: EpidemicParams | float, v0, t_end: float,
                    dt: float = 0.01) -> np.ndarray:
    """Explicit Euler integration of ``dv_i/dt = beta(1-v_i) sum_j a_ij v_j - delta v_i``."""
    beta, delta = _as_params(p).rates
    v = np.array(v0, dtype=float)
    if v.shape != (g.n,):
        raise ValueError(f"v0 must have length {g.n}")
    if np.any(v < 0) or np.any(v > 1):
        raise ValueError("v0 entries must lie in [0, 1]")
    a = g.adjacency
    steps = int(round(t_end / dt))
    for step in range(steps):
        v = v + dt * (beta * (1.0 - v) * (a @ v) - delta * v)
        lo, hi = v.min(), v.max()
        if lo < -1e-9 or hi > 1.0 + 1e-9:
            raise UnstableStep(f"step {step}: v left [0, 1]; reduce dt={dt}")
        if lo < 0 or hi > 1:
            np.clip(v, 0.0, 1.0, out=v)
    return v


@dataclass
class SteadyStateCache:
    """Memoised :func:`steady_state` keyed on ``(graph rows, tau)``.

    Lookups and inserts hold a lock, so one cache may be shared by threads.
    Non-converged solves raise instead of being cached.
    """

    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    _store: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    hits: int = 0
    misses: int = 0

    def get(self, g: Graph, tau: float) -> np.ndarray:
        key = (g.rows, tau)
        with self._lock:
            v = self._store.get(key)
            if v is not None:
                self.hits += 1
                return v
        ss = steady_state(g, tau, self.tol, self.max_iter)
        if not ss.converged:
            raise ConvergenceError(f"steady state residual {ss.residual:.3g}", ss.iterations)
        with self._lock:
            self.misses += 1
            self._store[key] = ss.v
        return ss.v

    def __len__(self) -> int:
        return len(self._store)

    def clear(self) -> None:
        with self._lock:
            self._store.clear()


def regular_closed_form(degree: int, tau: float) -> float:
    """``v = 1 - 1/(tau d)`` on a ``d``-regular graph, or 0 below threshold."""
    if degree == 0 or tau * degree <= 1.0:
        return 0.0
    return 1.0 - 1.0 / (tau * degree)


__all__ = [
    "EpidemicParams", "SteadyState", "SteadyStateCache", "ThresholdUndefined",
    "UnstableStep", "epidemic_threshold", "fixed_point_map", "regular_closed_form",
    "steady_state", "total_infection", "transient_solve",
]
