"""Monte Carlo driver: trial blocks, statistics, sweeps and CSV output.

Trials are cut into fixed-size blocks. Block ``b`` always covers the same
trial indices and each trial draws from its own seeded stream, so failure
totals depend only on the configuration and master seed, never on how many
worker processes share the blocks.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import NormalDist

import numpy as np

from .engine import DECODERS, MODES, build_problem, run_trials

WORKERS_ENV = "SURFMATCH_WORKERS"
BLOCK_TRIALS = 50_000
# reference threshold scales quoted in plot captions
P_C_PERFECT = 1e-2
P_C_FAULT_TOLERANT = 2e-4

CSV_COLUMNS = ("mode", "decoder", "d", "p", "rounds", "trials", "failures_x", "failures_z",
               "p_l", "ci_low", "ci_high", "seed")


class ConfigError(ValueError):
    pass


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {n}")
    return n


@dataclass(frozen=True)
class TrialConfig:
    """One simulation cell.

    ``trials`` is the budget; with ``target_failures`` set the run may stop at
    the first block boundary where at least that many logical X failures and
    at least ``min_trials`` trials have accumulated.
    """

    mode: str
    decoder: str
    d: int
    p: float
    trials: int
    seed: int
    rounds: int | None = None
    workers: int = 1
    target_failures: int | None = None
    min_trials: int = 0
    replace_rule: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.decoder not in DECODERS:
            raise ConfigError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        if not isinstance(self.d, (int, np.integer)) or self.d < 3:
            raise ConfigError(f"d must be an integer >= 3, got {self.d!r}")
        if not 0.0 <= self.p < 0.5:
            raise ConfigError(f"p must lie in [0, 0.5), got {self.p}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.seed is None or self.seed < 0:
            raise ConfigError("a non-negative master seed is required")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.mode == "perfect2d":
            object.__setattr__(self, "rounds", 1)
        elif self.rounds is None:
            object.__setattr__(self, "rounds", int(self.d))
        elif self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.target_failures is not None and self.target_failures < 1:
            raise ConfigError("target_failures must be >= 1")


@dataclass(frozen=True)
class TrialStats:
    """Aggregated outcome of one cell.

    ``p_l`` is per trial in perfect-measurement mode and per round in
    fault-tolerant mode, computed from the logical X failures; the interval is
    a 95% Wilson interval mapped the same way.
    """

    config: TrialConfig
    trials: int
    failures_x: int
    failures_z: int
    p_l: float
    ci_low: float
    ci_high: float
    wall_time: float = field(default=0.0, compare=False)
    stopped_early: bool = False

    @property
    def p_c(self) -> float:
        return P_C_PERFECT if self.config.mode == "perfect2d" else P_C_FAULT_TOLERANT

    def row(self) -> dict:
        c = self.config
        return {
            "mode": c.mode, "decoder": c.decoder, "d": c.d, "p": c.p, "rounds": c.rounds,
            "trials": self.trials, "failures_x": self.failures_x, "failures_z": self.failures_z,
            "p_l": self.p_l, "ci_low": self.ci_low, "ci_high": self.ci_high, "seed": c.seed,
        }

    def to_dict(self) -> dict:
        out = self.row()
        out.update(wall_time=self.wall_time, stopped_early=self.stopped_early)
        return out


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= failures <= trials:
        raise ValueError(f"need 0 <= failures <= trials and trials >= 1, got {failures}/{trials}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = failures / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return lo, hi


def per_round(p_fail: float, rounds: int) -> float:
    """Per-round rate equivalent to failing with ``p_fail`` over ``rounds`` rounds."""
    return 1.0 - (1.0 - p_fail) ** (1.0 / rounds)


def _block(config: TrialConfig, start: int, count: int) -> tuple[int, int]:
    if config.p == 0.0:
        return 0, 0
    problem = build_problem(config.mode, int(config.d), float(config.p), config.rounds)
    fx, fz = run_trials(problem, config.seed, start, count, config.decoder, config.replace_rule)
    return int(fx.sum()), int(fz.sum())


def _blocks(config: TrialConfig):
    start = 0
    while start < config.trials:
        count = min(BLOCK_TRIALS, config.trials - start)
        yield start, count
        start += count


def _stats(config: TrialConfig, trials: int, fx: int, fz: int, wall: float, early: bool) -> TrialStats:
    lo, hi = wilson_interval(fx, trials)
    p_l = fx / trials
    if config.mode == "fault_tolerant3d":
        p_l, lo, hi = (per_round(v, config.rounds) for v in (p_l, lo, hi))
    return TrialStats(config, trials, fx, fz, p_l, lo, hi, wall, early)


def run(config: TrialConfig) -> TrialStats:
    """Simulate one cell and aggregate its failures."""
    t0 = time.perf_counter()
    blocks = list(_blocks(config))
    done = 0
    fx = fz = 0
    early = False

    def should_stop() -> bool:
        return (config.target_failures is not None and fx >= config.target_failures
                and done >= config.min_trials)

    if config.workers == 1 or len(blocks) == 1:
        results = (_block(config, s, c) for s, c in blocks)
        for (s, c), (bx, bz) in zip(blocks, results):
            fx, fz, done = fx + bx, fz + bz, done + c
            if should_stop() and done < config.trials:
                early = True
                break
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            pending = []
            nxt = 0
            while nxt < len(blocks) and len(pending) < 2 * config.workers:
                pending.append(pool.submit(_block, config, *blocks[nxt]))
                nxt += 1
            i = 0
            while pending:
                bx, bz = pending.pop(0).result()
                fx, fz, done = fx + bx, fz + bz, done + blocks[i][1]
                i += 1
                if should_stop() and done < config.trials:
                    early = True
                    for f in pending:
                        f.cancel()
                    break
                if nxt < len(blocks):
                    pending.append(pool.submit(_block, config, *blocks[nxt]))
                    nxt += 1
    return _stats(config, done, fx, fz, time.perf_counter() - t0, early)


def sweep(ds, ps, **common) -> list[TrialStats]:
    """One :func:`run` per (d, p), in row-major order."""
    ds, ps = list(ds), list(ps)
    if not ds or not ps:
        raise ConfigError("sweep needs at least one d and one p")
    return [run(TrialConfig(d=d, p=p, **common)) for d in ds for p in ps]


def to_csv(stats: list[TrialStats], stream=None) -> str:
    buf = io.StringIO() if stream is None else stream
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for s in stats:
        w.writerow(s.row())
    return buf.getvalue() if stream is None else ""


def fit_slope(points) -> tuple[float, float]:
    """Least-squares slope (and its standard error) of log p_L against log p.

    ``points`` is an iterable of ``(p, p_L)`` pairs or of :class:`TrialStats`.
    At least three points with nonzero ``p_L`` are required.
    """
    xs, ys = [], []
    for pt in points:
        p, pl = (pt.config.p, pt.p_l) if isinstance(pt, TrialStats) else pt
        if pl <= 0 or p <= 0:
            continue
        xs.append(math.log(p))
        ys.append(math.log(pl))
    if len(xs) < 3:
        raise ValueError(f"slope fit needs >= 3 points with failures, got {len(xs)}")
    x, y = np.array(xs), np.array(ys)
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    dof = len(x) - 2
    se = math.sqrt(float(resid @ resid) / dof / float(((x - x.mean()) ** 2).sum())) if dof > 0 else 0.0
    return float(slope), se


def with_workers(config: TrialConfig, workers: int) -> TrialConfig:
    return replace(config, workers=workers)


__all__ = [
    "BLOCK_TRIALS", "CSV_COLUMNS", "ConfigError", "P_C_FAULT_TOLERANT", "P_C_PERFECT",
    "TrialConfig", "TrialStats", "WORKERS_ENV", "default_workers", "fit_slope",
    "per_round", "run", "sweep", "to_csv", "wilson_interval", "with_workers",
]
