"""Expected regret and violation, collected reward, and run aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algorithms import RunTrace
from .environment import BanditInstance
from .exceptions import InfeasibleError, InvalidInputError
from .lp_core import solve_lp_arrays

SERIES_FIELDS = ("regret", "violation", "cum_reward", "ratio")


@dataclass
class MetricSeries:
    """Metrics sampled at ``t_grid`` (1-based round indices).

    ``ratio`` is NaN where the cumulative violation is zero.
    """

    t_grid: np.ndarray
    regret: np.ndarray
    violation: np.ndarray
    cum_reward: np.ndarray
    ratio: np.ndarray


@dataclass
class AggregateSeries:
    t_grid: np.ndarray
    mean: dict[str, np.ndarray]
    std: dict[str, np.ndarray]
    runs: int


def log_grid(horizon: int, points: int = 200) -> np.ndarray:
    """Roughly log-spaced round indices in [1, horizon], always ending at horizon."""
    if horizon < 1:
        raise InvalidInputError("horizon must be positive")
    grid = np.unique(np.rint(np.geomspace(1, horizon, num=max(points, 2))).astype(np.int64))
    if grid[-1] != horizon:
        grid = np.append(grid, horizon)
    return grid


def stationary_optimum(instance: BanditInstance) -> tuple[np.ndarray, float]:
    """Optimal stationary selection vector x* and its per-round reward r*."""
    sol = solve_lp_arrays(instance.mu, instance.r, instance.eta)
    if not sol.feasible:
        raise InfeasibleError(
            f"instance {instance.name!r} is infeasible: max mu={instance.mu.max():.6g} "
            f"< eta={instance.eta:.6g}"
        )
    return sol.x, sol.objective


def _check(trace: RunTrace, instance: BanditInstance):
    if trace.n_arms != instance.n_arms:
        raise InvalidInputError(
            f"trace has {trace.n_arms} arms but instance has {instance.n_arms}"
        )


def _grid(trace, t_grid):
    if t_grid is None:
        return np.arange(1, trace.horizon + 1)
    t_grid = np.asarray(t_grid, dtype=np.int64)
    if t_grid.size and (t_grid.min() < 1 or t_grid.max() > trace.horizon):
        raise InvalidInputError(f"t_grid must lie in [1, {trace.horizon}]")
    return t_grid


def play_counts(trace: RunTrace, t_grid) -> np.ndarray:
    """Matrix of k_i(t + 1) for each t in ``t_grid`` (rows) and arm (columns)."""
    t_grid = _grid(trace, t_grid)
    counts = np.empty((t_grid.size, trace.n_arms), dtype=np.int64)
    order = np.argsort(trace.arms, kind="stable")
    rounds_sorted = order + 1
    bounds = np.searchsorted(trace.arms[order], np.arange(trace.n_arms + 1))
    for i in range(trace.n_arms):
        played_at = rounds_sorted[bounds[i]:bounds[i + 1]]
        counts[:, i] = np.searchsorted(played_at, t_grid, side="right")
    return counts


def _gaps(instance):
    _, r_star = stationary_optimum(instance)
    return r_star - instance.mu * instance.r


def regret_series(trace: RunTrace, instance: BanditInstance, t_grid=None) -> np.ndarray:
    """R(t) = [sum_i Delta_i k_i(t + 1)]_+ with Delta_i = r* - mu_i r_i."""
    _check(trace, instance)
    counts = play_counts(trace, t_grid)
    return np.maximum(counts @ _gaps(instance), 0.0)


def violation_series(trace: RunTrace, instance: BanditInstance, t_grid=None) -> np.ndarray:
    """V(t) = [sum_i (eta - mu_i) k_i(t + 1)]_+."""
    _check(trace, instance)
    counts = play_counts(trace, t_grid)
    return np.maximum(counts @ (instance.eta - instance.mu), 0.0)


def cumulative_reward(trace: RunTrace, t_grid=None) -> np.ndarray:
    total = np.cumsum(trace.collected)
    if t_grid is None:
        return total
    return total[_grid(trace, t_grid) - 1]


def reward_violation_ratio(cum_reward, violation) -> np.ndarray:
    """Cumulative reward per unit of violation; NaN where the violation is zero."""
    cum_reward = np.asarray(cum_reward, dtype=np.float64)
    violation = np.asarray(violation, dtype=np.float64)
    out = np.full(cum_reward.shape, np.nan)
    pos = violation > 0
    out[pos] = cum_reward[pos] / violation[pos]
    return out


def metric_series(trace: RunTrace, instance: BanditInstance, t_grid=None) -> MetricSeries:
    t_grid = _grid(trace, t_grid)
    regret = regret_series(trace, instance, t_grid)
    violation = violation_series(trace, instance, t_grid)
    cum = cumulative_reward(trace, t_grid)
    return MetricSeries(t_grid, regret, violation, cum, reward_violation_ratio(cum, violation))


def aggregate_runs(series: list[MetricSeries]) -> AggregateSeries:
    """Pointwise mean and sample standard deviation (ddof=1) across runs.

    Undefined ratios are skipped; a point with no defined ratio stays NaN.
    A single run reports a standard deviation of zero.
    """
    if not series:
        raise InvalidInputError("nothing to aggregate")
    grid = series[0].t_grid
    for s in series[1:]:
        if not np.array_equal(s.t_grid, grid):
            raise InvalidInputError("all series must share the same t_grid")
    mean, std = {}, {}
    for name in SERIES_FIELDS:
        stack = np.vstack([getattr(s, name) for s in series]).astype(np.float64)
        defined = np.sum(~np.isnan(stack), axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            m = np.nansum(stack, axis=0) / defined
            dev = np.where(np.isnan(stack), 0.0, stack - m) ** 2
            sd = np.sqrt(np.sum(dev, axis=0) / (defined - 1))
        m[defined == 0] = np.nan
        sd[defined == 1] = 0.0
        sd[defined == 0] = np.nan
        mean[name] = m
        std[name] = sd
    return AggregateSeries(grid, mean, std, len(series))
