"""Measurement-only trajectories and trajectory-averaged observables.

One layer is ``L`` measurements drawn independently from the ensemble and
applied in sequence. Steady-state quantities are averaged over the last
``steps_measure`` layers and over ``translations`` shifted copies of the
regions; the half-chain time series uses the same shifted cuts.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .ensembles import EnsembleSpec, sample_packed
from .stabilizer import StabilizerState

OBSERVABLES = ("half_chain", "profile", "mutual_info", "tripartite")
_CHUNK_LAYERS = 16
WORKERS_ENV = "MEASONLY_WORKERS"


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


@dataclass(frozen=True)
class RunConfig:
    spec: EnsembleSpec
    steps_equilibrate: Optional[int] = None  # default 4 L
    steps_measure: Optional[int] = None  # default 2 L
    trajectories: int = 100
    master_seed: int = 0
    observables: tuple = ("half_chain",)
    i3_divisor: int = 4
    translations: int = 4
    sample_every: int = 1
    keep_raw: bool = False

    def __post_init__(self):
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise ValueError(f"unknown observables {sorted(unknown)}")
        if self.trajectories < 1 or self.translations < 1 or self.sample_every < 1:
            raise ValueError("counts must be positive")
        if self.n_equilibrate < 0 or self.n_measure < 1:
            raise ValueError("need at least one measurement layer")
        L = self.L
        if "mutual_info" in self.observables and L % 8:
            raise ValueError(f"mutual information needs L divisible by 8, got {L}")
        if "tripartite" in self.observables and (self.i3_divisor < 3 or L % self.i3_divisor):
            raise ValueError(f"tripartite information needs L divisible by {self.i3_divisor}")

    @property
    def L(self) -> int:
        return self.spec.length

    @property
    def n_equilibrate(self) -> int:
        return 4 * self.L if self.steps_equilibrate is None else self.steps_equilibrate

    @property
    def n_measure(self) -> int:
        return 2 * self.L if self.steps_measure is None else self.steps_measure

    def with_spec(self, spec: EnsembleSpec) -> RunConfig:
        return replace(self, spec=spec)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(), "L": self.L,
            "steps_equilibrate": self.n_equilibrate, "steps_measure": self.n_measure,
            "trajectories": self.trajectories, "master_seed": self.master_seed,
            "observables": list(self.observables), "i3_divisor": self.i3_divisor,
            "translations": self.translations, "sample_every": self.sample_every,
        }


@dataclass
class TrajectoryRecord:
    index: int
    half_chain_series: Optional[np.ndarray] = None
    steady: dict = field(default_factory=dict)
    profile: Optional[np.ndarray] = None


@dataclass
class ObservableSeries:
    times: np.ndarray
    mean: np.ndarray
    std_error: np.ndarray
    raw: Optional[np.ndarray] = None


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _arc(start: int, length: int, L: int) -> np.ndarray:
    return (start + np.arange(length, dtype=np.int64)) % L


class _Probe:
    """Region bookkeeping for the steady-state observables of one config."""

    def __init__(self, config: RunConfig):
        L = config.L
        T = config.translations
        self.half = [_arc((j * L) // (2 * T), L // 2, L) for j in range(T)]
        self.mi = []
        if "mutual_info" in config.observables:
            for j in range(T):
                s = (j * L) // (2 * T)
                a, b = _arc(s, L // 8, L), _arc(s + L // 2, L // 8, L)
                self.mi.append((a, b, np.concatenate([a, b])))
        self.i3 = []
        if "tripartite" in config.observables:
            q = L // config.i3_divisor
            for j in range(T):
                s = (j * L) // T
                a, b, c = _arc(s, q, L), _arc(s + q, q, L), _arc(s + 2 * q, q, L)
                self.i3.append((a, b, c))

    @staticmethod
    def entropy(x, z, sites) -> int:
        return int(_kernels.region_rank(x, z, sites)) - sites.size

    def half_chain(self, x, z) -> float:
        return float(np.mean([self.entropy(x, z, s) for s in self.half]))

    def mutual_info(self, x, z) -> float:
        S = self.entropy
        return float(np.mean([S(x, z, a) + S(x, z, b) - S(x, z, ab) for a, b, ab in self.mi]))

    def tripartite(self, x, z) -> float:
        S = self.entropy
        vals = []
        for a, b, c in self.i3:
            ab, bc, ca = np.concatenate([a, b]), np.concatenate([b, c]), np.concatenate([c, a])
            abc = np.concatenate([a, b, c])
            vals.append(S(x, z, a) + S(x, z, b) + S(x, z, c)
                        - S(x, z, ab) - S(x, z, bc) - S(x, z, ca) + S(x, z, abc))
        return float(np.mean(vals))


def profile_snapshot(state: StabilizerState, stride: int = 1) -> np.ndarray:
    """Mean entropy of contiguous arcs of sizes 1..L/2, averaged over start sites."""
    L = state.length
    starts = range(0, L, stride)
    acc = np.zeros(L // 2)
    for s in starts:
        acc += _kernels.arc_entropies(state.x, state.z, s, L // 2)
    return acc / len(starts)


def run_trajectory(config: RunConfig, index: int) -> TrajectoryRecord:
    """Evolve the Z-product state and record the requested observables.

    Bit-identical for identical ``(config, index)``.
    """
    L = config.L
    rng = trajectory_rng(config.master_seed, index)
    state = StabilizerState.product_state(L)
    probe = _Probe(config)
    obs = set(config.observables)
    total = config.n_equilibrate + config.n_measure
    rec = TrajectoryRecord(index)
    if "half_chain" in obs:
        # the series uses the same cut-averaged value as the steady state
        rec.half_chain_series = np.zeros(total + 1)
        rec.half_chain_series[0] = probe.half_chain(state.x, state.z)
    sums = {k: 0.0 for k in obs - {"profile"}}
    profile = np.zeros(L // 2) if "profile" in obs else None
    n_samples = 0

    t = 0
    while t < total:
        n_layers = min(_CHUNK_LAYERS, total - t)
        mx, mz = sample_packed(config.spec, rng, n_layers * L)
        for k in range(n_layers):
            _kernels.measure_many(state.x, state.z, mx[k * L:(k + 1) * L], mz[k * L:(k + 1) * L])
            t += 1
            half = None
            if rec.half_chain_series is not None:
                half = rec.half_chain_series[t] = probe.half_chain(state.x, state.z)
            window = t - config.n_equilibrate
            if window <= 0 or window % config.sample_every:
                continue
            n_samples += 1
            if half is not None:
                sums["half_chain"] += half
            if "mutual_info" in obs:
                sums["mutual_info"] += probe.mutual_info(state.x, state.z)
            if "tripartite" in obs:
                sums["tripartite"] += probe.tripartite(state.x, state.z)
            if profile is not None:
                profile += profile_snapshot(state)
    rec.steady = {k: v / n_samples for k, v in sums.items()}
    if profile is not None:
        rec.profile = profile / n_samples
    return rec


@dataclass
class EnsembleResult:
    config: RunConfig
    steady_mean: dict
    steady_stderr: dict
    series: Optional[ObservableSeries] = None
    profile: Optional[ObservableSeries] = None  # times holds the arc sizes

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(),
                "steady": {k: {"mean": self.steady_mean[k], "std_error": self.steady_stderr[k]}
                           for k in sorted(self.steady_mean)}}


def _stats(rows: np.ndarray):
    mean = rows.mean(axis=0)
    if rows.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, rows.std(axis=0, ddof=1) / np.sqrt(rows.shape[0])


def _run_one(args):
    config, index = args
    return run_trajectory(config, index)


def run_records(config: RunConfig, workers: Optional[int] = None) -> list[TrajectoryRecord]:
    workers = default_workers() if workers is None else workers
    jobs = [(config, i) for i in range(config.trajectories)]
    if workers <= 1 or config.trajectories == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def run_ensemble_average(config: RunConfig, workers: Optional[int] = None) -> EnsembleResult:
    """Run every trajectory and aggregate in trajectory order (worker-count independent)."""
    records = run_records(config, workers)
    means, errs = {}, {}
    for key in records[0].steady:
        m, e = _stats(np.array([r.steady[key] for r in records]))
        means[key], errs[key] = float(m), float(e)
    result = EnsembleResult(config, means, errs)
    if records[0].half_chain_series is not None:
        raw = np.stack([r.half_chain_series for r in records])
        m, e = _stats(raw)
        result.series = ObservableSeries(np.arange(raw.shape[1]), m, e,
                                         raw if config.keep_raw else None)
    if records[0].profile is not None:
        raw = np.stack([r.profile for r in records])
        m, e = _stats(raw)
        result.profile = ObservableSeries(np.arange(1, raw.shape[1] + 1), m, e,
                                          raw if config.keep_raw else None)
    return result


def entropy_profile(config: RunConfig, workers: Optional[int] = None) -> list[tuple[int, float]]:
    """Steady-state mean S_A for contiguous A of sizes 1..L/2."""
    config = replace(config, observables=tuple(set(config.observables) | {"profile"}))
    prof = run_ensemble_average(config, workers).profile
    return [(int(s), float(m)) for s, m in zip(prof.times, prof.mean)]


def row_seed(master_seed: int, grid_index: int, length: int) -> int:
    return int(np.random.SeedSequence([master_seed, grid_index, length]).generate_state(1, np.uint64)[0])


def sweep(template: RunConfig, grid: Sequence[float], sizes: Sequence[int],
          workers: Optional[int] = None) -> list[dict]:
    """One row per (q0, L) with steady-state means and standard errors.

    ``q0`` moves the ensemble along the symmetric line p_x = p_y = q0.
    """
    if not grid or not sizes:
        raise ValueError("empty parameter grid or size list")
    if not hasattr(template.spec, "at_q0"):
        raise ValueError(f"{template.spec.family} ensembles have no q0 knob")
    rows = []
    for L in sizes:
        for i, q0 in enumerate(grid):
            seed = row_seed(template.master_seed, i, L)
            config = replace(template, spec=template.spec.at_q0(float(q0)).with_length(int(L)),
                             master_seed=seed)
            res = run_ensemble_average(config, workers)
            row = {"q0": float(q0), "L": int(L), "trajectories": config.trajectories, "seed": seed}
            for key in sorted(res.steady_mean):
                row[f"{key}_mean"] = res.steady_mean[key]
                row[f"{key}_stderr"] = res.steady_stderr[key]
            rows.append(row)
    return rows
