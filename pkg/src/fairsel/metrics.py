"""Fairness accounting, theoretical-bound certificates, and tail checks.

A SelectionTrace is the full record of a multi-round run: one selected set
and one utility value per round. Everything else here is derived views of a
trace (selection fractions, debts, running averages) or certificates that
the run's fractional solution met its provable guarantees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import FractionalPoint
from .multilinear import ExtensionEstimator, ExtensionEvaluator
from .oracles import UtilityOracle, WorkerPool

DEFAULT_FAIRNESS_EPS = 1e-3


class SelectionTrace:
    """Per-round selections plus their utilities for one policy run."""

    def __init__(
        self,
        n: int,
        selections: Sequence[tuple[int, ...]],
        utilities: Sequence[float],
    ):
        if len(selections) != len(utilities):
            raise ValueError("one utility per round required")
        if not selections:
            raise ValueError("a trace needs at least one round")
        self.n = int(n)
        self.selections = list(selections)
        self.utilities = np.asarray(utilities, dtype=float)

    @property
    def horizon(self) -> int:
        return len(self.selections)

    def selection_matrix(self) -> np.ndarray:
        """(T, n) boolean matrix of who was selected when."""
        out = np.zeros((self.horizon, self.n), dtype=bool)
        for t, sel in enumerate(self.selections):
            out[t, list(sel)] = True
        return out

    def cumulative_counts(self) -> np.ndarray:
        """(T, n) matrix: N_u(t) after each round."""
        return np.cumsum(self.selection_matrix(), axis=0, dtype=np.int64)

    def fractions(self) -> np.ndarray:
        return self.cumulative_counts()[-1] / float(self.horizon)

    def running_average(self) -> np.ndarray:
        """Time-average utility after each round."""
        return np.cumsum(self.utilities) / np.arange(1, self.horizon + 1)

    def mean_utility(self) -> float:
        return float(self.utilities.mean())

    def max_debt(self, fairness: np.ndarray) -> np.ndarray:
        """Per-worker max over t of r_u * t - N_u(t)."""
        t = np.arange(1, self.horizon + 1)[:, None]
        debts = np.asarray(fairness, dtype=float)[None, :] * t - self.cumulative_counts()
        return debts.max(axis=0)


@dataclass(frozen=True)
class FairnessReport:
    """Final selection fractions against the floors, with a small tolerance."""

    fractions: np.ndarray
    requirements: np.ndarray
    satisfied: np.ndarray  # bool per worker: fraction >= r - eps
    max_debt: np.ndarray
    eps: float

    @property
    def all_satisfied(self) -> bool:
        return bool(self.satisfied.all())

    @property
    def unsatisfied_ids(self) -> tuple[int, ...]:
        return tuple(int(u) for u in np.nonzero(~self.satisfied)[0])


def fairness_report(
    trace: SelectionTrace,
    fairness: Iterable[float],
    eps: float = DEFAULT_FAIRNESS_EPS,
) -> FairnessReport:
    r = np.asarray(list(fairness) if not isinstance(fairness, np.ndarray) else fairness,
                   dtype=float)
    if r.shape != (trace.n,):
        raise ValueError(f"fairness vector has shape {r.shape}, expected ({trace.n},)")
    fractions = trace.fractions()
    return FairnessReport(
        fractions=fractions,
        requirements=r,
        satisfied=fractions >= r - eps,
        max_debt=trace.max_debt(r),
        eps=float(eps),
    )


@dataclass(frozen=True)
class AlphaFairnessResult:
    ok: bool
    alpha: float
    # earliest (round, worker) with fraction below r_u - 1/t**alpha, else None
    first_violation: tuple[int, int] | None


def alpha_fairness_check(
    trace: SelectionTrace, fairness: Iterable[float], alpha: float
) -> AlphaFairnessResult:
    """Check every prefix: N_u(t)/t >= r_u - t**(-alpha) for all u."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    r = np.asarray(list(fairness) if not isinstance(fairness, np.ndarray) else fairness,
                   dtype=float)
    t = np.arange(1, trace.horizon + 1, dtype=float)[:, None]
    fractions = trace.cumulative_counts() / t
    slack = r[None, :] - t ** (-alpha)
    bad_rounds, bad_workers = np.nonzero(fractions < slack)
    if bad_rounds.size == 0:
        return AlphaFairnessResult(ok=True, alpha=float(alpha), first_violation=None)
    first = np.lexsort((bad_workers, bad_rounds))[0]
    return AlphaFairnessResult(
        ok=False,
        alpha=float(alpha),
        first_violation=(int(bad_rounds[first]) + 1, int(bad_workers[first])),
    )


@dataclass(frozen=True)
class BoundCertificates:
    """Guarantee check for a fractional solution y(1) against U_opt.

    Variant one must reach (1 - 1/e) * U_opt; variant two must reach
    (1 - exp(-c_r)) * U_opt + F(r) * exp(-c_r), where
    c_r = 1 - max(max_u r_u, sum(r)/k) measures how much room the floors
    leave. With a Monte Carlo extension the check downgrades to a
    statistical certificate: the tolerance widens by three standard errors.
    """

    extension_value: float
    sigma: float
    mode: str  # "exact" or "monte_carlo"
    c_r: float
    u_opt: float
    f_of_r: float
    variant_one_bound: float
    variant_two_bound: float
    variant_one_ok: bool
    variant_two_ok: bool
    tol: float


def concession_rate(pool: WorkerPool) -> float:
    """c_r = 1 - max(max_u r_u, sum(r)/k): the floor-free share of the clock."""
    r = pool.fairness
    return 1.0 - max(float(r.max()), float(r.sum()) / pool.k)


def bound_certificates(
    pool: WorkerPool,
    oracle: UtilityOracle,
    y1: FractionalPoint | Iterable[float],
    u_opt: float,
    f_of_r: float,
    estimator: ExtensionEstimator | None = None,
    tol: float = 1e-3,
) -> BoundCertificates:
    evaluator = ExtensionEvaluator(oracle, estimator)
    value, sigma = evaluator.value_with_stderr(FractionalPoint.coerce(y1))
    c_r = concession_rate(pool)
    bound_one = (1.0 - 1.0 / math.e) * u_opt
    decay = math.exp(-c_r)
    bound_two = (1.0 - decay) * u_opt + f_of_r * decay
    slack = tol + (3.0 * sigma if evaluator.mode == "monte_carlo" else 0.0)
    return BoundCertificates(
        extension_value=value,
        sigma=sigma,
        mode=evaluator.mode,
        c_r=c_r,
        u_opt=float(u_opt),
        f_of_r=float(f_of_r),
        variant_one_bound=bound_one,
        variant_two_bound=bound_two,
        variant_one_ok=value >= bound_one - slack,
        variant_two_ok=value >= bound_two - slack,
        tol=float(tol),
    )


@dataclass(frozen=True)
class TailReport:
    """Empirical shortfall frequencies against the Hoeffding tail bound."""

    delta: float
    horizon: int
    ensemble_size: int
    bound: float  # exp(-2 T delta^2)
    statistical_slack: float
    frequencies: np.ndarray  # per worker: share of traces with fraction <= r - delta
    ok: bool
    worst_worker: int


def hoeffding_tail_check(
    traces: Sequence[SelectionTrace],
    fairness: Iterable[float],
    delta: float,
    confidence: float = 1e-3,
) -> TailReport:
    """Check P[fraction_u <= r_u - delta] <= exp(-2 T delta^2) empirically.

    ``confidence`` sets the statistical slack added to the bound for the
    finite ensemble: sqrt(log(1/confidence) / (2 M)).
    """
    if len(traces) < 100:
        raise ValueError("need an ensemble of at least 100 traces")
    if delta <= 0:
        raise ValueError("delta must be positive")
    horizon = traces[0].horizon
    if any(tr.horizon != horizon for tr in traces):
        raise ValueError("all traces must share one horizon")
    r = np.asarray(list(fairness) if not isinstance(fairness, np.ndarray) else fairness,
                   dtype=float)
    stacked = np.stack([tr.fractions() for tr in traces])  # (M, n)
    freq = (stacked <= r[None, :] - delta).mean(axis=0)
    bound = math.exp(-2.0 * horizon * delta * delta)
    slack = math.sqrt(math.log(1.0 / confidence) / (2.0 * len(traces)))
    ok = bool((freq <= bound + slack).all())
    return TailReport(
        delta=float(delta),
        horizon=horizon,
        ensemble_size=len(traces),
        bound=bound,
        statistical_slack=slack,
        frequencies=freq,
        ok=ok,
        worst_worker=int(np.argmax(freq - bound)),
    )
