"""Analytical quantities for LinConTS: KL divergence, thresholds, bound terms.

Only the explicit terms of the regret/violation bounds are evaluated. The
lower-order remainders carry unspecified constants and are reported as
strings (``"O(N/gamma^2)"``), never as numbers.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .environment import BanditInstance
from .exceptions import (
    DegeneracyError,
    DomainError,
    InfeasibleError,
    ThresholdRangeError,
)
from .lp_core import DualCertificate, compute_dual_certificate, solve_lp_arrays

REMAINDER = "O(N/gamma^2)"
LEMMA2_TAIL = ("(1/epsilon1) * sum_{j<T} O(exp(-dp^2 j/2) + exp(-D j)/((j+1) dp^2) "
               "+ 1/(exp(dp^2 j/4) - 1))")
SQRT_CONSTANT = 18.0


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q).

    Uses 0 log 0 = 0; returns +inf when q is 0 or 1 and p differs from q.

    >>> round(bernoulli_kl(0.5, 0.75), 6)
    0.143841
    """
    p, q = float(p), float(q)
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise DomainError(f"KL arguments must lie in [0, 1], got ({p}, {q})")
    if p == q:
        return 0.0
    if q == 0.0 or q == 1.0:
        return math.inf
    # log1p of the relative gaps loses far less precision when p is near q
    out = 0.0
    if p > 0.0:
        out -= p * math.log1p((q - p) / p)
    if p < 1.0:
        out += (1.0 - p) * math.log1p((q - p) / (1.0 - q))
    return max(out, 0.0)


def _bisect(f, lo, hi, tol, increasing):
    """Root of a monotone f on [lo, hi].

    Bisects until the bracket is narrower than ``tol`` or its ends are
    adjacent doubles, then returns the end with the smaller residual.
    """
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        above = f(mid) > 0.0
        if above == increasing:
            hi = mid
        else:
            lo = mid
    return lo if abs(f(lo)) <= abs(f(hi)) else hi


def choose_thresholds(mu_i: float, xi_i: float, gamma: float, tol: float = 0.0):
    """Thresholds (y, z) with mu < y < z < xi.

    y solves d(y, xi) = d(mu, xi) / (1 + gamma) and z solves
    d(y, z) = d(mu, xi) / (1 + gamma)^2, so that log T / d(y, z) equals
    (1 + gamma)^2 log T / d(mu, xi).
    """
    if not (0.0 <= mu_i < xi_i < 1.0):
        raise DomainError(f"need 0 <= mu < xi < 1, got mu={mu_i}, xi={xi_i}")
    if not (0.0 < gamma <= 1.0):
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    base = bernoulli_kl(mu_i, xi_i)
    t_y = base / (1.0 + gamma)
    t_z = base / (1.0 + gamma) ** 2
    y = _bisect(lambda v: bernoulli_kl(v, xi_i) - t_y, mu_i, xi_i, tol, increasing=False)
    z = _bisect(lambda v: bernoulli_kl(y, v) - t_z, y, xi_i, tol, increasing=True)
    if not (mu_i < y < z < xi_i):
        raise ThresholdRangeError(
            f"thresholds collapsed: mu={mu_i}, y={y}, z={z}, xi={xi_i}"
        )
    return y, z


def kappa_vector(z_i: float, r, lambda_star: float, i: int, strict: bool = True) -> np.ndarray:
    """kappa_j = z_i (r_i - lambda*) / (r_j - lambda*), with kappa_i = z_i.

    The line through (z_i, z_i r_i) and (kappa_j, kappa_j r_j) then has
    slope lambda*. Entries with r_j = lambda* are NaN. With ``strict`` any
    entry outside (0, 1) raises :class:`ThresholdRangeError` naming the arms.
    """
    r = np.asarray(r, dtype=np.float64)
    den = r - lambda_star
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(den != 0.0, z_i * (r[i] - lambda_star) / den, np.nan)
    kappa[i] = z_i
    bad = np.flatnonzero(~((kappa > 0.0) & (kappa < 1.0)))
    if strict and bad.size:
        raise ThresholdRangeError(
            f"kappa outside (0, 1) for arms {bad.tolist()}", arms=bad.tolist()
        )
    return kappa


def epsilon_one(kappa1: float, kappa2: float, eta: float) -> float:
    """(kappa2 - eta) / (kappa2 - kappa1); requires kappa2 > eta and kappa2 > kappa1."""
    if not kappa2 > eta:
        raise DomainError(f"epsilon_1 needs kappa2 > eta, got kappa2={kappa2}, eta={eta}")
    if not kappa2 > kappa1:
        raise DomainError(f"epsilon_1 needs kappa2 > kappa1, got {kappa2} <= {kappa1}")
    return (kappa2 - eta) / (kappa2 - kappa1)


@dataclass
class ArmAnalysis:
    index: int
    mu: float
    xi: float
    kl_mu_xi: float
    delta_plus: float
    small_delta_plus: float
    y: float = math.nan
    z: float = math.nan
    L: float = math.nan
    kappa: np.ndarray | None = None
    epsilon1: float = math.nan
    delta_prime: float = math.nan
    D: float = math.nan
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kappa"] = None if self.kappa is None else [_num(v) for v in self.kappa]
        return {k: (_num(v) if isinstance(v, float) else v) for k, v in d.items()}


@dataclass
class BoundReport:
    gamma: float
    horizon: float
    x_star: np.ndarray
    r_star: float
    duals: DualCertificate
    support: tuple[int, ...]
    regret_leading: float
    regret_sqrt: float
    violation_leading: float
    violation_sqrt: float
    arms: list[ArmAnalysis]
    remainder: str = REMAINDER
    notes: list[str] = field(default_factory=list)

    def bounds_dict(self) -> dict:
        return {
            "regret_leading": self.regret_leading,
            "regret_sqrt": self.regret_sqrt,
            "violation_leading": self.violation_leading,
            "violation_sqrt": self.violation_sqrt,
            "remainder": self.remainder,
        }


@dataclass
class Lemma2Bound:
    value: float
    terms: dict[str, float]
    tail: str = LEMMA2_TAIL


def _num(v):
    """JSON-safe float: NaN/inf become None."""
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _optimum(instance: BanditInstance, tol: float):
    mu, r = instance.mu, instance.r
    sol = solve_lp_arrays(mu, r, instance.eta)
    if not sol.feasible:
        raise InfeasibleError(
            f"instance infeasible: max mu={mu.max():.6g} < eta={instance.eta:.6g}"
        )
    duals = compute_dual_certificate(instance.arms, instance.eta, sol)
    tied = [i for i in range(mu.shape[0]) if i not in sol.support and duals.psi[i] <= tol]
    if tied:
        raise DegeneracyError(
            f"optimal mixture is not unique: arms {tied} have zero reduced cost "
            f"alongside support {list(sol.support)}"
        )
    return sol, duals


def _support_pair(instance, support):
    """(low, high) support arms, i.e. mu_low < eta <= mu_high, or None."""
    if len(support) != 2:
        return None
    a, b = support
    mu = instance.mu
    return (a, b) if mu[a] < mu[b] else (b, a)


def analyze_arm(instance: BanditInstance, i: int, gamma: float, horizon: float,
                sol=None, duals=None, tol: float = 1e-9) -> ArmAnalysis:
    """Threshold quantities for suboptimal arm ``i``; problems are flagged, not raised."""
    if sol is None or duals is None:
        sol, duals = _optimum(instance, tol)
    if i in sol.support:
        raise DomainError(f"arm {i} is in the optimal support {list(sol.support)}")
    mu, r, eta = instance.mu, instance.r, instance.eta
    xi = float(duals.nu / (r[i] + duals.lam))
    r_star = sol.objective
    a = ArmAnalysis(
        index=i,
        mu=float(mu[i]),
        xi=xi,
        kl_mu_xi=bernoulli_kl(mu[i], xi) if xi < 1.0 else math.inf,
        delta_plus=float(max(0.0, r_star - mu[i] * r[i])),
        small_delta_plus=float(max(0.0, eta - mu[i])),
    )
    if xi >= 1.0:
        a.flags.append("xi>=1: arm cannot enter the support; thresholds undefined")
        return a
    a.y, a.z = choose_thresholds(float(mu[i]), xi, gamma)
    d_yz = bernoulli_kl(a.y, a.z)
    a.L = math.log(horizon) / d_yz
    a.kappa = kappa_vector(a.z, r, duals.lam, i, strict=False)
    bad = [j for j in range(len(r)) if not (0.0 < a.kappa[j] < 1.0)]
    if bad:
        a.flags.append(f"kappa outside (0, 1) for arms {bad}")
    pair = _support_pair(instance, sol.support)
    if pair is None:
        a.flags.append("single-arm support: kappa_1/kappa_2 undefined")
        return a
    lo, hi = pair
    k1, k2 = float(a.kappa[lo]), float(a.kappa[hi])
    if k2 > eta and k2 > k1:
        a.epsilon1 = epsilon_one(k1, k2, eta)
    else:
        a.flags.append(f"kappa_2={k2:.6g} does not exceed eta={eta:.6g} and kappa_1={k1:.6g}")
    a.delta_prime = float(mu[lo]) - k1
    if not a.delta_prime > 0.0:
        a.flags.append(f"delta_prime={a.delta_prime:.6g} <= 0: play-count bound vacuous")
    if 0.0 <= k1 <= 1.0:
        a.D = bernoulli_kl(a.z, float(mu[lo]))
    return a


def theorem_bounds(instance: BanditInstance, gamma: float, horizon: float,
                   tol: float = 1e-9) -> BoundReport:
    """Explicit terms of the LinConTS regret and violation bounds at ``horizon``.

    regret_leading = log T * sum_i (1 + gamma)^2 / d(mu_i, xi_i) * Delta_i^+
    regret_sqrt    = max_i Delta_i^+ * 18 * sqrt(2 T log 2)
    and likewise for the violation with delta_i^+ = max(0, eta - mu_i).
    The sums run over the arms outside the optimal support.
    """
    if not (0.0 < gamma <= 1.0):
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    if not horizon >= 2:
        raise DomainError(f"horizon must be >= 2, got {horizon}")
    sol, duals = _optimum(instance, tol)
    mu, r, eta = instance.mu, instance.r, instance.eta
    notes = []
    imax = int(np.argmax(mu * r))
    if mu[imax] >= eta:
        notes.append("the highest-reward arm meets the constraint; problem is unconstrained")
    analyses = [analyze_arm(instance, i, gamma, horizon, sol, duals, tol)
                for i in range(instance.n_arms) if i not in sol.support]
    log_t = math.log(horizon)
    scale = (1.0 + gamma) ** 2
    reg = sum(scale / a.kl_mu_xi * a.delta_plus for a in analyses if math.isfinite(a.kl_mu_xi))
    vio = sum(scale / a.kl_mu_xi * a.small_delta_plus for a in analyses
              if math.isfinite(a.kl_mu_xi))
    delta_max = float(np.max(np.maximum(0.0, sol.objective - mu * r)))
    small_max = float(np.max(np.maximum(0.0, eta - mu)))
    root = SQRT_CONSTANT * math.sqrt(2.0 * horizon * math.log(2.0))
    return BoundReport(
        gamma=gamma,
        horizon=horizon,
        x_star=sol.x,
        r_star=sol.objective,
        duals=duals,
        support=sol.support,
        regret_leading=reg * log_t,
        regret_sqrt=delta_max * root,
        violation_leading=vio * log_t,
        violation_sqrt=small_max * root,
        arms=analyses,
        notes=notes,
    )


def lemma2_bound(instance: BanditInstance, i: int, gamma: float, horizon: float,
                 tol: float = 1e-9) -> Lemma2Bound:
    """Explicit part of the expected-plays bound for suboptimal arm ``i``:

        2 + L_i(T) + 1 / d(y_i, xi_i) + 24 / (epsilon_1 * delta_prime^2)

    The trailing O(.) sum is excluded and carried as ``tail``.
    """
    if not horizon >= 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    a = analyze_arm(instance, i, gamma, horizon, tol=tol)
    if not math.isfinite(a.y):
        raise ThresholdRangeError(f"arm {i}: {'; '.join(a.flags)}", arms=[i])
    if not a.delta_prime > 0.0:
        raise ThresholdRangeError(
            f"arm {i}: delta_prime={a.delta_prime:.6g} <= 0, bound is vacuous", arms=[i]
        )
    if not math.isfinite(a.epsilon1):
        raise ThresholdRangeError(f"arm {i}: {'; '.join(a.flags)}", arms=[i])
    terms = {
        "constant": 2.0,
        "L": a.L,
        "inv_kl_y_xi": 1.0 / bernoulli_kl(a.y, a.xi),
        "optimal_arm_term": 24.0 / (a.epsilon1 * a.delta_prime ** 2),
    }
    return Lemma2Bound(value=sum(terms.values()), terms=terms)
