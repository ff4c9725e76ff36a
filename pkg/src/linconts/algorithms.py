"""LinConTS and LinCon-KL-UCB policies.

Conventions: rounds are numbered from 1, arms from 0. Rounds ``t < N``
force-play arm ``t - 1`` (so the last arm is never forced), after which
every round solves the LP on sampled means (LinConTS) or KL-UCB indices
(LinCon-KL-UCB) and draws the arm from the resulting selection vector,
falling back to a uniform draw when the LP is infeasible.

:func:`run_policy` runs whole horizons in a compiled kernel; the per-round
functions below consume the random stream in exactly the same order, so a
hand-written loop over them reproduces ``run_policy`` traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._backend import get_kernels
from ._rng import Xoshiro256
from .environment import BanditInstance
from .exceptions import DomainError, InvalidInputError

POLICIES = ("linconts", "linconklucb")
KLUCB_TOL = 1e-12


@dataclass(frozen=True)
class PosteriorState:
    alpha: np.ndarray
    beta: np.ndarray

    @classmethod
    def uniform(cls, n: int) -> PosteriorState:
        return cls(np.ones(n), np.ones(n))

    @property
    def plays(self) -> np.ndarray:
        return self.alpha + self.beta - 2.0

    @property
    def successes(self) -> np.ndarray:
        return self.alpha - 1.0


@dataclass(frozen=True)
class CountState:
    plays: np.ndarray
    successes: np.ndarray

    @classmethod
    def empty(cls, n: int) -> CountState:
        return cls(np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64))

    def __post_init__(self):
        if np.any(self.successes < 0) or np.any(self.successes > self.plays):
            raise InvalidInputError("count state needs 0 <= successes <= plays")


@dataclass(frozen=True)
class RoundDecision:
    sampled_means: np.ndarray | None
    selection_vector: np.ndarray
    chosen_arm: int
    lp_feasible: bool
    forced: bool = False


def posterior_update(state: PosteriorState, arm: int, reward_event: int) -> PosteriorState:
    n = state.alpha.shape[0]
    if not 0 <= arm < n:
        raise InvalidInputError(f"arm {arm} out of range for {n} arms")
    if reward_event not in (0, 1):
        raise InvalidInputError(f"reward event must be 0 or 1, got {reward_event!r}")
    alpha = state.alpha.copy()
    beta = state.beta.copy()
    alpha[arm] += reward_event
    beta[arm] += 1 - reward_event
    return PosteriorState(alpha, beta)


def count_update(state: CountState, arm: int, reward_event: int) -> CountState:
    n = state.plays.shape[0]
    if not 0 <= arm < n:
        raise InvalidInputError(f"arm {arm} out of range for {n} arms")
    if reward_event not in (0, 1):
        raise InvalidInputError(f"reward event must be 0 or 1, got {reward_event!r}")
    plays = state.plays.copy()
    succ = state.successes.copy()
    plays[arm] += 1
    succ[arm] += reward_event
    return CountState(plays, succ)


def klucb_threshold(t: int, c: float = 0.0) -> float:
    """``log t + c log log t``, the KL budget at round ``t``."""
    if c != 0.0 and t < 2:
        raise DomainError(f"log log t is undefined at t={t}; need t >= 2 when c != 0")
    if t < 1:
        raise DomainError(f"round index must be >= 1, got {t}")
    thr = math.log(t)
    if c != 0.0:
        thr += c * math.log(math.log(t))
    return thr


def klucb_index(s: int, k: int, t: int, c: float = 0.0, tol: float = KLUCB_TOL,
                backend: str | None = None) -> float:
    """Largest q in [s/k, 1) with ``k * d(s/k, q) <= log t + c log log t``.

    Unplayed arms (k = 0) get the optimistic index 1. When every play
    succeeded the bound has the closed form ``exp(-threshold / k)``.
    Otherwise the root is bracketed by bisection until the bracket is
    narrower than ``tol * (1 - q)`` (never wider than ``tol``); the
    returned value is the feasible end of the bracket.
    """
    if not (0 <= s <= k):
        raise InvalidInputError(f"need 0 <= s <= k, got s={s}, k={k}")
    thr = klucb_threshold(t, c)
    kern = get_kernels(backend)
    return float(kern.klucb_scalar(float(s), float(k), thr, tol))


def _decide(kern, means, rewards, eta, n, rng: Xoshiro256):
    st = _state_for(kern, rng)
    feasible, a, b, xa, xb, _obj = kern.lp_select(means, rewards, float(eta))
    arm, mode = kern.pick_arm(feasible, a, b, xa, n, st)
    _store_state(kern, rng, st)
    x = np.zeros(n)
    if mode == _kernels.UNIFORM:
        x[:] = 1.0 / n
    else:
        x[a] = xa
        if b >= 0:
            x[b] = xb
    return int(arm), x, bool(feasible)


def _state_for(kern, rng):
    if kern.jit:
        return rng.state_array()
    return rng._s


def _store_state(kern, rng, st):
    if kern.jit:
        rng.set_state_array(st)


def _forced(t, n):
    x = np.zeros(n)
    x[t - 1] = 1.0
    return RoundDecision(None, x, t - 1, True, forced=True)


def linconts_round(state: PosteriorState, rewards, eta: float, t: int, rng: Xoshiro256,
                   backend: str | None = None) -> RoundDecision:
    """One LinConTS round: Beta samples per arm, LP on the samples, draw an arm."""
    rewards = np.asarray(rewards, dtype=np.float64)
    n = rewards.shape[0]
    if t < 1:
        raise InvalidInputError(f"round index must be >= 1, got {t}")
    if t < n:
        return _forced(t, n)
    kern = get_kernels(backend)
    st = _state_for(kern, rng)
    theta = kern.sample_betas(np.asarray(state.alpha, dtype=np.float64),
                              np.asarray(state.beta, dtype=np.float64), st)
    _store_state(kern, rng, st)
    arm, x, feasible = _decide(kern, theta, rewards, eta, n, rng)
    return RoundDecision(theta, x, arm, feasible)


def linconklucb_round(state: CountState, rewards, eta: float, t: int, rng: Xoshiro256,
                      c: float = 0.0, tol: float = KLUCB_TOL,
                      backend: str | None = None) -> RoundDecision:
    """One LinCon-KL-UCB round: KL-UCB index per arm, LP on the indices, draw an arm."""
    rewards = np.asarray(rewards, dtype=np.float64)
    n = rewards.shape[0]
    if t < 1:
        raise InvalidInputError(f"round index must be >= 1, got {t}")
    if t < n:
        return _forced(t, n)
    kern = get_kernels(backend)
    thr = klucb_threshold(t, c)
    idx = kern.klucb_indices(np.asarray(state.successes, dtype=np.float64),
                             np.asarray(state.plays, dtype=np.float64), thr, tol)
    arm, x, feasible = _decide(kern, idx, rewards, eta, n, rng)
    return RoundDecision(idx, x, arm, feasible)


@dataclass
class RunTrace:
    """Per-round record of one policy run.

    ``support``/``weights`` store the selection vector sparsely (it has at
    most two nonzeros); ``mode`` is 0 for forced rounds, 1 for LP rounds,
    2 for the uniform fallback.
    """

    policy: str
    seed: int
    n_arms: int
    arms: np.ndarray
    events: np.ndarray
    collected: np.ndarray
    mode: np.ndarray
    support: np.ndarray
    weights: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return int(self.arms.shape[0])

    def plays(self, t: int | None = None) -> np.ndarray:
        """Plays per arm over rounds 1..t, i.e. k_i(t + 1)."""
        t = self.horizon if t is None else t
        return np.bincount(self.arms[:t], minlength=self.n_arms)

    def selection_vector(self, t: int) -> np.ndarray:
        k = t - 1
        x = np.zeros(self.n_arms)
        if self.mode[k] == _kernels.UNIFORM:
            x[:] = 1.0 / self.n_arms
            return x
        for j in range(2):
            if self.support[k, j] >= 0:
                x[self.support[k, j]] = self.weights[k, j]
        return x

    def lp_feasible(self) -> np.ndarray:
        return self.mode != _kernels.UNIFORM

    def to_csv_rows(self):
        for k in range(self.horizon):
            yield k + 1, int(self.arms[k]), int(self.events[k]), float(self.collected[k])


def run_policy(policy: str, instance: BanditInstance, horizon: int, seed: int = 0, *,
               klucb_c: float = 0.0, klucb_tol: float = KLUCB_TOL,
               backend: str | None = None) -> RunTrace:
    """Simulate ``horizon`` rounds of ``policy`` against ``instance``.

    One xoshiro256** stream seeded with ``seed`` drives both the policy
    and the reward events, so the trace is a pure function of the inputs.
    """
    policy = policy.lower().replace("-", "").replace("_", "")
    if policy not in POLICIES:
        raise InvalidInputError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    n = instance.n_arms
    if horizon < n:
        raise InvalidInputError(f"horizon {horizon} must be at least the number of arms {n}")
    if policy == "linconklucb" and klucb_c != 0.0 and n < 2:
        raise DomainError("klucb_c != 0 needs t >= 2 in every LP round, i.e. at least 2 arms")
    kern = get_kernels(backend)
    rng = Xoshiro256(seed)
    st = _state_for(kern, rng)
    mu, r = instance.mu, instance.r
    if policy == "linconts":
        out = kern.run_linconts(mu, r, instance.eta, int(horizon), st)
        params = {}
    else:
        out = kern.run_klucb(mu, r, instance.eta, int(horizon), float(klucb_c), float(klucb_tol), st)
        params = {"klucb_c": float(klucb_c)}
    arms, events, mode, support, weights = out
    return RunTrace(
        policy=policy,
        seed=int(seed),
        n_arms=n,
        arms=arms,
        events=events,
        collected=events * r[arms],
        mode=mode,
        support=support,
        weights=weights,
        params=params,
    )


def replay_policy(policy: str, instance: BanditInstance, horizon: int, seed: int = 0, *,
                  klucb_c: float = 0.0, backend: str | None = None) -> RunTrace:
    """Reference loop built from the per-round functions (slow; for cross-checks)."""
    from .environment import sample_reward_event

    rng = Xoshiro256(seed)
    n = instance.n_arms
    r = instance.r
    post = PosteriorState.uniform(n)
    counts = CountState.empty(n)
    rows = []
    for t in range(1, horizon + 1):
        if policy == "linconts":
            d = linconts_round(post, r, instance.eta, t, rng, backend=backend)
        else:
            d = linconklucb_round(counts, r, instance.eta, t, rng, c=klucb_c, backend=backend)
        ev = sample_reward_event(instance, d.chosen_arm, rng)
        post = posterior_update(post, d.chosen_arm, ev)
        counts = count_update(counts, d.chosen_arm, ev)
        rows.append((d, ev))
    arms = np.array([d.chosen_arm for d, _ in rows], dtype=np.int64)
    events = np.array([ev for _, ev in rows], dtype=np.int8)
    mode = np.array([_kernels.FORCED if d.forced else
                     (_kernels.LP if d.lp_feasible else _kernels.UNIFORM) for d, _ in rows],
                    dtype=np.int8)
    support = np.full((horizon, 2), -1, dtype=np.int64)
    weights = np.zeros((horizon, 2))
    for k, (d, _) in enumerate(rows):
        if mode[k] != _kernels.UNIFORM:
            nz = np.flatnonzero(d.selection_vector)
            support[k, : nz.size] = nz
            weights[k, : nz.size] = d.selection_vector[nz]
    return RunTrace(policy, seed, n, arms, events, events * r[arms], mode, support, weights)
