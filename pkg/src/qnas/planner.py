"""Greedy planning step: acquire instances until all response-time
thresholds hold, then release redundant instances down to a Pareto-optimal
configuration.  All decisions are driven by model predictions only.

Tie-breaking everywhere is lowest index (deterministic traces).
"""

from dataclasses import dataclass

import numpy as np

from .errors import IterationCap, UnattainableSla
from .model import (
    Configuration,
    ResponseTimes,
    asymptotic_floor,
    capacity_floor,
    min_feasible_config,
    predict_response,
    rescale_snapshot,
)

DEFAULT_ITERATION_CAP = 1_000_000


@dataclass(frozen=True)
class SlaThresholds:
    """Per-class upper bounds on mean response time."""

    max_response: np.ndarray

    def __post_init__(self):
        r = np.array(self.max_response, dtype=np.float64)
        if r.ndim != 1:
            raise ValueError("max_response must be a 1-D vector")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise ValueError("thresholds must be finite and > 0")
        r.setflags(write=False)
        object.__setattr__(self, "max_response", r)

    @property
    def num_classes(self):
        return self.max_response.shape[0]


@dataclass(frozen=True)
class PlanOutcome:
    new_config: Configuration
    acquire_iterations: int
    release_iterations: int
    predicted_response: ResponseTimes
    feasible: bool


def _class_response_terms(total_d_row, floor, counts):
    """Per-station contribution of one class: D_ck*M_k*N_k / (N_k - floor_k)."""
    out = np.zeros_like(total_d_row)
    used = total_d_row > 0.0
    out[used] = total_d_row[used] * counts[used] / (counts[used] - floor[used])
    return out


def check_attainable(base, sla):
    """Thresholds must sit strictly above the asymptotic response floor."""
    floor_c = asymptotic_floor(base)
    bad = sla.max_response <= floor_c + 1e-9
    if np.any(bad):
        raise UnattainableSla(np.flatnonzero(bad).tolist())


def acquire(base, sla, iteration_cap=DEFAULT_ITERATION_CAP):
    """Grow the configuration until every class meets its threshold.

    Preconditioning first lifts the configuration to the minimum feasible
    point so predictions are defined; those additions are not counted as
    greedy iterations.  Each greedy iteration adds one instance to the
    station that most reduces the most-violating class's response time.
    Returns (configuration, greedy iteration count).
    """
    if sla.num_classes != base.num_classes:
        raise ValueError("threshold vector length does not match C")
    check_attainable(base, sla)
    counts = np.maximum(base.ref_config.counts, min_feasible_config(base).counts)
    floor = capacity_floor(base)
    total_d = base.total_demands()
    limits = sla.max_response
    iters = 0
    rt = predict_response(base, Configuration(counts))
    while np.any(rt.per_class > limits):
        iters += 1
        if iters > iteration_cap:
            raise IterationCap("acquire exceeded %d iterations" % iteration_cap)
        b = int(np.argmax((rt.per_class - limits) / limits))
        terms_now = _class_response_terms(total_d[b], floor, counts)
        terms_inc = np.empty_like(terms_now)
        for k in range(counts.shape[0]):
            nk = counts[k]
            if total_d[b, k] > 0.0:
                terms_inc[k] = total_d[b, k] * (nk + 1) / (nk + 1 - floor[k])
            else:
                terms_inc[k] = 0.0
        j = int(np.argmax(terms_now - terms_inc))
        counts[j] += 1
        rt = predict_response(base, Configuration(counts))
    return Configuration(counts), iters


def release(base, sla, iteration_cap=DEFAULT_ITERATION_CAP):
    """Shrink the reference configuration greedily while keeping every
    threshold satisfied.  The caller guarantees the reference configuration
    already meets the thresholds.  Returns (configuration, iteration count);
    the result is Pareto-optimal: no single instance can be removed without
    breaking capacity or a threshold.
    """
    if sla.num_classes != base.num_classes:
        raise ValueError("threshold vector length does not match C")
    counts = base.ref_config.counts.copy()
    floor = capacity_floor(base)
    limits = sla.max_response
    total_d = base.total_demands()
    # Candidates must stay strictly above the capacity floor after removal.
    candidates = [k for k in range(counts.shape[0]) if counts[k] - 1 > floor[k]]
    iters = 0
    while candidates:
        iters += 1
        if iters > iteration_cap:
            raise IterationCap("release exceeded %d iterations" % iteration_cap)
        rt = predict_response(base, Configuration(counts))
        d = int(np.argmin((limits - rt.per_class) / limits))
        best_j = -1
        best_r = np.inf
        for j in candidates:
            trial = counts.copy()
            trial[j] -= 1
            r_d = _class_response_terms(total_d[d], floor, trial).sum()
            if r_d < best_r:
                best_r = r_d
                best_j = j
        trial = counts.copy()
        trial[best_j] -= 1
        rt_trial = predict_response(base, Configuration(trial))
        if np.any(rt_trial.per_class > limits):
            # Increments are additive, so this station can never be shrunk.
            candidates.remove(best_j)
        else:
            counts = trial
            if not counts[best_j] - 1 > floor[best_j]:
                candidates.remove(best_j)
    return Configuration(counts), iters


def plan_step(base, sla, iteration_cap=DEFAULT_ITERATION_CAP):
    """One planning pass: acquire, re-reference the snapshot at the acquired
    configuration, release, and report the result."""
    acquired, acq_iters = acquire(base, sla, iteration_cap)
    rebased = rescale_snapshot(base, acquired)
    released, rel_iters = release(rebased, sla, iteration_cap)
    rt = predict_response(rebased, released)
    feasible = bool(np.all(rt.per_class <= sla.max_response))
    return PlanOutcome(released, acq_iters, rel_iters, rt, feasible)
