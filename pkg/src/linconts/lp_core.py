"""Exact solver for the reward-event constrained arm-mixture LP.

    maximize    sum_i x_i mu_i r_i
    subject to  sum_i x_i mu_i >= eta,  sum_i x_i = 1,  x >= 0

With only two non-sign rows, every basic solution is either a single arm
meeting the constraint or a two-arm mixture that meets it with equality,
so the solver enumerates those bases instead of pivoting.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ._backend import get_kernels
from .exceptions import DegeneracyError, DomainError, InvalidInputError

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ArmParams:
    """Reward-event probability ``mu`` and deterministic reward value ``r``."""

    mu: float
    r: float

    def __post_init__(self):
        mu, r = float(self.mu), float(self.r)
        if not (0.0 <= mu <= 1.0):
            raise InvalidInputError(f"mu must lie in [0, 1], got {self.mu!r}")
        if not (0.0 < r <= 1.0):
            raise InvalidInputError(f"r must lie in (0, 1], got {self.r!r}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective: float
    support: tuple[int, ...]
    feasible: bool


@dataclass(frozen=True)
class DualCertificate:
    """Multipliers for the constraint row (lambda), simplex row (nu) and x >= 0 (psi)."""

    lam: float
    nu: float
    psi: np.ndarray


@dataclass
class KktReport:
    residuals: dict[str, float]
    tol: float
    passed: dict[str, bool] = field(init=False)

    def __post_init__(self):
        self.passed = {k: bool(v <= self.tol) for k, v in self.residuals.items()}

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.passed.items() if not v]


def as_arrays(arms) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(mu, r)`` float arrays from a sequence of arms or (mu, r) pairs."""
    if len(arms) == 0:
        raise InvalidInputError("arm list is empty")
    parsed = [a if isinstance(a, ArmParams) else ArmParams(*a) for a in arms]
    mu = np.array([a.mu for a in parsed], dtype=np.float64)
    r = np.array([a.r for a in parsed], dtype=np.float64)
    return mu, r


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not (0.0 <= eta <= 1.0):
        raise InvalidInputError(f"eta must lie in [0, 1], got {eta!r}")
    return eta


def solve_constrained_lp(
    arms: Sequence, eta: float, tol: float = DEFAULT_TOL, backend: str | None = None
) -> LpSolution:
    """Solve the LP exactly by basic-solution enumeration.

    Ties between equal objectives go to the smaller support, then to the
    lexicographically smallest index pair. Returns ``feasible=False`` with
    an all-zero ``x`` when no arm reaches ``eta``.

    >>> sol = solve_constrained_lp([(0.1, 1.0), (0.9, 0.1)], 0.5)
    >>> sol.x.tolist(), round(sol.objective, 12)
    ([0.5, 0.5], 0.095)
    """
    mu, r = as_arrays(arms)
    eta = _check_eta(eta)
    return solve_lp_arrays(mu, r, eta, tol=tol, backend=backend)


def solve_lp_arrays(mu, r, eta, tol=DEFAULT_TOL, backend=None) -> LpSolution:
    """Array-level entry point; skips per-arm validation."""
    kern = get_kernels(backend)
    mu = np.ascontiguousarray(mu, dtype=np.float64)
    r = np.ascontiguousarray(r, dtype=np.float64)
    feasible, a, b, xa, xb, obj = kern.lp_select(mu, r, float(eta))
    x = np.zeros(mu.shape[0])
    if not feasible:
        return LpSolution(x=x, objective=math.nan, support=(), feasible=False)
    x[a] = xa
    if b >= 0:
        x[b] = xb
    support = tuple(int(i) for i in np.flatnonzero(x > tol))
    return LpSolution(x=x, objective=float(obj), support=support, feasible=True)


def compute_dual_certificate(arms, eta: float, solution: LpSolution) -> DualCertificate:
    """Recover (lambda, nu, psi) from an optimal primal solution.

    Two-arm support {a, b} with mu_a < mu_b: lambda and nu solve
    ``r_i mu_i + lambda mu_i - nu = 0`` on both arms. Single-arm support j:
    the smallest admissible lambda >= 0, which is zero when the constraint
    is slack.
    """
    mu, r = as_arrays(arms)
    eta = _check_eta(eta)
    if not solution.feasible:
        raise InvalidInputError("dual certificate requested for an infeasible LP")
    sup = solution.support
    if len(sup) == 2:
        a, b = sup
        if mu[a] == mu[b]:
            raise DegeneracyError(
                f"support arms {a} and {b} share mu={mu[a]}; duals are not unique"
            )
        if mu[a] > mu[b]:
            a, b = b, a
        lam = (r[a] * mu[a] - r[b] * mu[b]) / (mu[b] - mu[a])
        nu = (r[a] - r[b]) * mu[a] * mu[b] / (mu[b] - mu[a])
    elif len(sup) == 1:
        (j,) = sup
        lower = mu < mu[j]
        lam = 0.0
        if lower.any():
            slopes = (mu[lower] * r[lower] - mu[j] * r[j]) / (mu[j] - mu[lower])
            lam = max(0.0, float(slopes.max()))
        nu = mu[j] * (r[j] + lam)
    else:
        raise DegeneracyError(f"support of size {len(sup)} has no unique basic duals")
    psi = nu - mu * (r + lam)
    # support arms are zero up to rounding; pin them exactly
    psi[list(sup)] = 0.0
    return DualCertificate(lam=float(lam), nu=float(nu), psi=psi)


def slack_threshold(arm_index: int, arms, duals: DualCertificate, tol: float = DEFAULT_TOL) -> float:
    """Largest mean arm ``arm_index`` can take while staying out of the support.

    ``xi_i = nu / (r_i + lambda)``; defined only for arms with ``psi_i > 0``.
    """
    mu, r = as_arrays(arms)
    if not 0 <= arm_index < mu.shape[0]:
        raise InvalidInputError(f"arm index {arm_index} out of range for {mu.shape[0]} arms")
    if duals.psi[arm_index] <= tol:
        raise DomainError(
            f"arm {arm_index} has psi={duals.psi[arm_index]:.3g}; slack is defined "
            "only for suboptimal arms"
        )
    return float(duals.nu / (r[arm_index] + duals.lam))


def verify_kkt(arms, eta: float, solution: LpSolution, duals: DualCertificate,
               tol: float = 1e-8) -> KktReport:
    """Residuals of every KKT condition; never raises on a failed check."""
    mu, r = as_arrays(arms)
    x = np.asarray(solution.x, dtype=np.float64)
    psi = np.asarray(duals.psi, dtype=np.float64)
    lam, nu = float(duals.lam), float(duals.nu)
    event_rate = float(x @ mu)
    objective = float(x @ (mu * r))
    primal = max(abs(float(x.sum()) - 1.0), max(0.0, eta - event_rate), max(0.0, -float(x.min())))
    dual = max(0.0, -lam, -float(psi.min()))
    stationarity = float(np.max(np.abs(r * mu + lam * mu - nu + psi)))
    slackness = max(float(np.max(np.abs(x * psi))), abs(lam * (eta - event_rate)))
    gap = abs(objective - (nu - lam * eta))
    return KktReport(
        residuals={
            "primal_feasibility": primal,
            "dual_feasibility": dual,
            "stationarity": stationarity,
            "complementary_slackness": slackness,
            "duality_gap": gap,
        },
        tol=tol,
    )
