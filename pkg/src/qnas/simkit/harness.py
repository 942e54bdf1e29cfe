"""Stepped control-loop harness: generate a workload series, observe the
system through the synthetic monitor, run one planning pass per step, and
aggregate allocation statistics over the horizon.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..errors import UnattainableSla
from ..model import Configuration, DemandMatrix
from ..planner import SlaThresholds, plan_step
from ..telemetry import NO_NOISE, NoiseSpec, ObservationWindow, measure_rates, observe
from ..workload import (
    DemandLaw,
    WorkloadLaw,
    default_law,
    default_thresholds,
    gen_arrival_series,
    gen_demands,
)
from .seeds import subseed


@dataclass(frozen=True)
class ScenarioSpec:
    """Full description of one experiment."""

    num_classes: int
    num_stations: int
    horizon: int
    window: float = 1.0
    master_seed: int = 0
    workload: Optional[WorkloadLaw] = None      # default_law if None
    demands: Optional[DemandMatrix] = None      # drawn from DemandLaw if None
    sla: Optional[SlaThresholds] = None         # default_thresholds if None
    sla_multiplier: float = 2.0
    noise: NoiseSpec = NO_NOISE
    initial_config: Optional[Configuration] = None  # all-ones if None
    poisson_arrivals: bool = False
    base_rate: float = 1.5
    amplitude: float = 0.8
    perturbation_sd: float = 0.1
    perturbation_persistence: float = 0.8

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.window <= 0:
            raise ValueError("window must be > 0")


@dataclass(frozen=True)
class StepRecord:
    step: int
    rates: np.ndarray
    config_before: Configuration
    config_after: Configuration
    predicted_response: np.ndarray
    thresholds: np.ndarray
    acquire_iterations: int
    release_iterations: int

    @property
    def total_instances(self):
        return self.config_after.total


@dataclass(frozen=True)
class RunSummary:
    acquire_max: int
    acquire_avg: float
    release_max: int
    release_avg: float
    instances_min: int
    instances_max: int
    instances_total: int
    static_total: int
    dynamic_static_ratio: float


@dataclass(frozen=True)
class RunRecord:
    spec: ScenarioSpec
    steps: list
    summary: RunSummary
    thresholds: SlaThresholds
    demands: DemandMatrix


def summarize(steps):
    """Aggregate allocation statistics over the recorded steps."""
    totals = np.array([s.total_instances for s in steps])
    acq = np.array([s.acquire_iterations for s in steps])
    rel = np.array([s.release_iterations for s in steps])
    static_total = len(steps) * int(totals.max())
    return RunSummary(
        acquire_max=int(acq.max()),
        acquire_avg=float(acq.mean()),
        release_max=int(rel.max()),
        release_avg=float(rel.mean()),
        instances_min=int(totals.min()),
        instances_max=int(totals.max()),
        instances_total=int(totals.sum()),
        static_total=static_total,
        dynamic_static_ratio=float(totals.sum() / static_total),
    )


def _observation_config(rates, demands_unit, current):
    """Where to take the measurement: the current configuration, or the
    minimum feasible one if the workload has overloaded the current one."""
    util = rates @ (demands_unit / current.counts[np.newaxis, :])
    if np.all(util < 1.0):
        return current
    floor_unit = rates @ demands_unit  # capacity floor at unit reference
    return Configuration(np.maximum(1, np.floor(floor_unit).astype(np.int64) + 1))


def run_scenario(spec):
    """Execute the control loop over the whole horizon."""
    demands = spec.demands
    if demands is None:
        demands = gen_demands(DemandLaw(spec.num_classes, spec.num_stations,
                                        seed=subseed(spec.master_seed, "demands")))
    sla = spec.sla
    if sla is None:
        sla = default_thresholds(demands, spec.sla_multiplier)
    law = spec.workload
    if law is None:
        law = default_law(spec.num_classes, spec.horizon,
                          seed=subseed(spec.master_seed, "workload-law"),
                          base_rate=spec.base_rate, amplitude=spec.amplitude,
                          perturbation_sd=spec.perturbation_sd,
                          perturbation_persistence=spec.perturbation_persistence)
    series = gen_arrival_series(law, spec.horizon,
                                seed=subseed(spec.master_seed, "workload"))
    config = spec.initial_config or Configuration(np.ones(spec.num_stations, dtype=np.int64))
    arr_rng = np.random.default_rng(subseed(spec.master_seed, "arrivals"))

    steps = []
    for t in range(spec.horizon):
        rates = series[t]
        if spec.poisson_arrivals:
            counts = arr_rng.poisson(rates * spec.window)
            rates = measure_rates(ObservationWindow(spec.window, counts)).rates
        obs_config = _observation_config(rates, demands.demands, config)
        noise = spec.noise
        if noise.mode == "sampled":
            noise = replace(noise, seed=subseed(noise.seed, "step-%d" % t))
        snap = observe(rates, demands, obs_config, noise)
        try:
            outcome = plan_step(snap, sla)
        except UnattainableSla as exc:
            raise UnattainableSla(exc.classes, "step %d: %s" % (t, exc)) from exc
        steps.append(StepRecord(
            step=t,
            rates=rates,
            config_before=config,
            config_after=outcome.new_config,
            predicted_response=outcome.predicted_response.per_class,
            thresholds=sla.max_response,
            acquire_iterations=outcome.acquire_iterations,
            release_iterations=outcome.release_iterations,
        ))
        config = outcome.new_config

    return RunRecord(spec, steps, summarize(steps), sla, demands)
