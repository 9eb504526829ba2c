"""Conformal scores, prediction intervals, and the adaptive threshold loop.

Three interval constructions share one predictive Gaussian per slot:

* Bayes credible set: fixed quantile multiple of the predictive std.
* Standard CP: threshold = the ceil((1-alpha)(t+1))-th smallest past score.
* Adaptive CP: threshold q_t moved by +/- eta on each coverage outcome,
  which is exactly online subgradient descent on the pinball loss at level
  1 - alpha.

The conformity score is the negative predictive log-likelihood

    s(y) = 0.5 * log(2 pi var) + (y - mean)^2 / (2 var)

clipped into [0, B] where it feeds threshold dynamics (boundedness of q_t
requires bounded scores).  Interval construction inverts the *raw* score
algebraically: s_raw(y) <= q  iff  |y - mean| <= radius with

    radius = sqrt(var) * sqrt(2 q - log(2 pi var))

and a negative radicand means no y satisfies the threshold: the set is
empty.  Under distribution shift the model's sets inflate, so a sustained
rise in windowed average set size doubles as a change-point signal that
resets the decaying learning-rate schedule.
"""

from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass, replace

from scipy.special import ndtri

from .osgp import PredictiveGaussian


@dataclass(frozen=True)
class IntervalSet:
    """A symmetric prediction interval, possibly empty.

    For empty sets ``radius`` holds the half-width shortfall (how far below
    the boundary threshold the score minimum sits, mapped back to y units);
    membership is always False regardless.
    """

    center: float
    radius: float
    empty: bool = False

    def contains(self, y: float) -> bool:
        return (not self.empty) and abs(y - self.center) <= self.radius

    @property
    def size(self) -> float:
        """Lebesgue measure of the set: 2 * radius, or 0 when empty."""
        return 0.0 if self.empty else 2.0 * self.radius

    @property
    def bounds(self) -> tuple[float, float]:
        """(lo, hi); empty sets are encoded reflected, with lo > hi."""
        if self.empty:
            return self.center + self.radius, self.center - self.radius
        return self.center - self.radius, self.center + self.radius


def nll_score_raw(pred: PredictiveGaussian, y: float) -> float:
    """Unclipped negative log-likelihood of y under the predictive Gaussian."""
    if not math.isfinite(y):
        raise ValueError(f"label must be finite, got {y!r}")
    var = pred.variance
    return 0.5 * math.log(2.0 * math.pi * var) + (y - pred.mean) ** 2 / (2.0 * var)


def nll_score(pred: PredictiveGaussian, y: float, B: float) -> float:
    """NLL conformity score clipped into [0, B]; larger means worse conformity."""
    if B <= 0.0:
        raise ValueError(f"clip bound B must be positive, got {B}")
    return min(max(nll_score_raw(pred, y), 0.0), B)


def invert_score(pred: PredictiveGaussian, q: float) -> IntervalSet:
    """Exact inversion of the raw NLL score at threshold q.

    Returns the set {y : nll_score_raw(y) <= q}, which is the interval
    centered on the predictive mean with radius
    sqrt(var) * sqrt(2 q - log(2 pi var)), or the empty set when the
    radicand is negative (q below the score's minimum).
    """
    var = pred.variance
    radicand = 2.0 * q - math.log(2.0 * math.pi * var)
    if radicand < 0.0:
        return IntervalSet(center=pred.mean, radius=math.sqrt(var * -radicand), empty=True)
    return IntervalSet(center=pred.mean, radius=math.sqrt(var * radicand))


def bayes_credible_set(pred: PredictiveGaussian, beta: float) -> IntervalSet:
    """Central interval holding probability mass beta under the predictive."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    c = float(ndtri((1.0 + beta) / 2.0))
    return IntervalSet(center=pred.mean, radius=c * math.sqrt(pred.variance))


class ScoreHistory:
    """Append-only pool of past online scores with an insertion-sorted view.

    Each observed label contributes exactly one score, computed under the
    model available when that label arrived and never recomputed.
    """

    def __init__(self, scores=()):
        self._scores: list[float] = []
        self._sorted: list[float] = []
        for s in scores:
            self.append(s)

    def append(self, score: float) -> None:
        score = float(score)
        self._scores.append(score)
        insort(self._sorted, score)

    def __len__(self) -> int:
        return len(self._scores)

    @property
    def scores(self) -> tuple[float, ...]:
        return tuple(self._scores)

    def kth_smallest(self, k: int) -> float:
        return self._sorted[k - 1]


def standard_cp_quantile(history: ScoreHistory, alpha: float) -> float:
    """The ceil((1-alpha)(t+1))-th smallest past score, or +inf if out of range.

    The +inf sentinel (returned whenever the index exceeds the pool size,
    including the empty pool) makes the prediction set the whole line.
    """
    t = len(history)
    k = math.ceil((1.0 - alpha) * (t + 1))
    if k > t:
        return math.inf
    return history.kth_smallest(k)


@dataclass(frozen=True)
class ChangePointDetector:
    """Streaming detector: windowed average set size rising r slots in a row.

    Pushes each slot's set size into a ring buffer of length ``window``.
    Once the buffer is full, each slot's window average is compared with the
    previous slot's; a strict increase bumps the counter, anything else
    clears it, and reaching ``consecutive`` declares a change point.  After
    firing, the counter clears but the size history is retained.
    """

    window: int = 15
    consecutive: int = 100
    sizes: tuple[float, ...] = ()
    prev_avg: float | None = None
    increase_count: int = 0


def changepoint_step(detector: ChangePointDetector, set_size: float) -> tuple[ChangePointDetector, bool]:
    """Advance the detector by one slot; returns (new detector, reset fired)."""
    if set_size < 0.0:
        raise ValueError(f"set size must be >= 0, got {set_size}")
    sizes = (detector.sizes + (float(set_size),))[-detector.window :]
    prev_avg = detector.prev_avg
    count = detector.increase_count
    fired = False
    if len(sizes) >= detector.window:
        avg = sum(sizes) / detector.window
        if prev_avg is not None and avg > prev_avg:
            count += 1
        elif prev_avg is not None:
            count = 0
        prev_avg = avg
        if count >= detector.consecutive:
            fired = True
            count = 0
    return replace(detector, sizes=sizes, prev_avg=prev_avg, increase_count=count), fired


@dataclass(frozen=True)
class AdaptiveState:
    """Threshold, schedule and detector state for the adaptive CP loop.

    ``q`` is the current threshold in score space, ``local_t`` counts slots
    since the last learning-rate reset (starting at 1), and ``B`` is the
    score clip bound; with clipped scores and q0 in [0, B] the threshold can
    never drift further than one step outside [0, B].
    """

    q: float
    alpha: float
    B: float
    eta_mode: str = "constant"
    eta_const: float = 0.05
    local_t: int = 1
    detector: ChangePointDetector = ChangePointDetector()

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.B <= 0.0:
            raise ValueError(f"B must be positive, got {self.B}")
        if self.eta_mode not in ("constant", "decaying_with_reset"):
            raise ValueError(f"unknown eta_mode {self.eta_mode!r}")


def lr_schedule(state: AdaptiveState) -> float:
    """Current learning rate: eta_const, or local_t**(-3/5) since last reset."""
    if state.eta_mode == "constant":
        return state.eta_const
    if state.local_t < 1:
        raise ValueError(f"local_t must be >= 1 in decaying mode, got {state.local_t}")
    return float(state.local_t) ** -0.6


def adaptive_update(state: AdaptiveState, covered: bool, eta: float) -> AdaptiveState:
    """One threshold step: q += eta * (1{miss} - alpha); advances local_t.

    Equivalent to a subgradient step on the pinball loss at level 1 - alpha
    evaluated at (score - q).
    """
    if eta <= 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    indicator = 0.0 if covered else 1.0
    q_next = state.q + eta * (indicator - state.alpha)
    return replace(state, q=q_next, local_t=state.local_t + 1)


def advance(state: AdaptiveState, covered: bool, set_size: float) -> tuple[AdaptiveState, float, bool]:
    """Full per-slot transition once the label is revealed.

    Computes the slot's learning rate, steps the threshold, feeds the set
    size to the change-point detector, and restarts the schedule when it
    fires.  Returns (next state, eta used, reset fired).
    """
    eta = lr_schedule(state)
    state = adaptive_update(state, covered, eta)
    detector, fired = changepoint_step(state.detector, set_size)
    state = replace(state, detector=detector, local_t=1 if fired else state.local_t)
    return state, eta, fired
