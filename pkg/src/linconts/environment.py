"""Bandit instances, Bernoulli reward events, CSV loading and synthetic generators.

CSV schema (UTF-8)::

    # lines starting with '#' are ignored
    arm_id,mu,r
    1,0.1,1.0
    2,0.9,0.1

Arms are sorted by ``arm_id``; the policies and traces index arms by their
position in that order (0-based).

Preparing real data: for coupon purchase logs, ``mu`` is the purchase rate
and ``r`` the final selling price divided by 200 (only coupons priced at
or below 200 qualify). For course enrolment data, ``mu`` is the min-max
normalised participant count (see :func:`normalize_minmax`) and ``r`` the
number of certified participants divided by the number of participants.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._rng import Xoshiro256
from .exceptions import CsvFormatError, InfeasibleError, InvalidInputError
from .lp_core import ArmParams

MAX_RESAMPLE = 100
COUPON_ETA = 0.25
EDX_ETA = 0.50


@dataclass(frozen=True)
class BanditInstance:
    arms: tuple[ArmParams, ...]
    eta: float
    name: str = "instance"

    def __post_init__(self):
        arms = tuple(a if isinstance(a, ArmParams) else ArmParams(*a) for a in self.arms)
        if not arms:
            raise InvalidInputError("a bandit instance needs at least one arm")
        eta = float(self.eta)
        if not (0.0 <= eta <= 1.0):
            raise InvalidInputError(f"eta must lie in [0, 1], got {self.eta!r}")
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "eta", eta)

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def mu(self) -> np.ndarray:
        return np.array([a.mu for a in self.arms])

    @property
    def r(self) -> np.ndarray:
        return np.array([a.r for a in self.arms])

    @property
    def feasible(self) -> bool:
        return max(a.mu for a in self.arms) >= self.eta

    def with_eta(self, eta: float) -> BanditInstance:
        return BanditInstance(self.arms, eta, self.name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "eta": self.eta,
            "n_arms": self.n_arms,
            "mu": [a.mu for a in self.arms],
            "r": [a.r for a in self.arms],
        }


def sample_reward_event(instance: BanditInstance, arm: int, rng: Xoshiro256) -> int:
    """Draw one Bernoulli(mu_arm) reward event using a single uniform."""
    if not 0 <= arm < instance.n_arms:
        raise InvalidInputError(f"arm {arm} out of range for {instance.n_arms} arms")
    return 1 if rng.random() < instance.arms[arm].mu else 0


def load_arms_csv(path, eta: float = 0.0, name: str | None = None) -> BanditInstance:
    """Parse an ``arm_id,mu,r`` file.

    ``eta`` is not stored in the file; pass it here or override it later
    with :meth:`BanditInstance.with_eta`.
    """
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        lines = [(i, line) for i, line in enumerate(fh, start=1)
                 if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise CsvFormatError("missing header 'arm_id,mu,r'")
    header_line, header = lines[0]
    cols = [c.strip() for c in next(csv.reader([header]))]
    if cols != ["arm_id", "mu", "r"]:
        raise CsvFormatError(f"expected header arm_id,mu,r, got {','.join(cols)}", row=header_line)
    seen = set()
    for lineno, line in lines[1:]:
        fields = [f.strip() for f in next(csv.reader([line]))]
        if len(fields) != 3:
            raise CsvFormatError(f"expected 3 fields, got {len(fields)}", row=lineno)
        try:
            arm_id = int(fields[0])
            mu = float(fields[1])
            r = float(fields[2])
        except ValueError as exc:
            raise CsvFormatError(f"non-numeric field ({exc})", row=lineno) from None
        if arm_id in seen:
            raise CsvFormatError(f"duplicate arm_id {arm_id}", row=lineno)
        seen.add(arm_id)
        try:
            arm = ArmParams(mu, r)
        except InvalidInputError as exc:
            raise CsvFormatError(str(exc), row=lineno) from None
        rows.append((arm_id, arm))
    if not rows:
        raise CsvFormatError("no arms")
    rows.sort(key=lambda item: item[0])
    return BanditInstance(
        arms=tuple(a for _, a in rows),
        eta=eta,
        name=name or path.stem,
    )


def write_arms_csv(instance: BanditInstance, path, comment: str | None = None) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write("arm_id,mu,r\n")
        for i, arm in enumerate(instance.arms, start=1):
            fh.write(f"{i},{arm.mu!r},{arm.r!r}\n")


def _synth(n, rng, eta, mu_scale, r_scale, name):
    if n < 2:
        raise InvalidInputError(f"synthetic instances need n >= 2, got {n}")
    best = 0.0
    for _ in range(MAX_RESAMPLE):
        mu = [mu_scale * rng.random() for _ in range(n)]
        # 1 - U lies in (0, 1], matching the half-open reward range
        r = [r_scale * (1.0 - rng.random()) for _ in range(n)]
        if max(mu) >= eta:
            return BanditInstance(tuple(ArmParams(m, v) for m, v in zip(mu, r)), eta, name)
        best = max(best, max(mu))
    raise InfeasibleError(
        f"infeasible {name} instance: max mu={best:.6g} < eta={eta:.6g} "
        f"in all {MAX_RESAMPLE} draws"
    )


def synth_coupon_like(n: int, rng: Xoshiro256, eta: float = COUPON_ETA) -> BanditInstance:
    """Arms with mu ~ U[0, 0.30] and r ~ U(0, 1]."""
    return _synth(n, rng, eta, 0.30, 1.0, "coupon")


def synth_edx_like(n: int, rng: Xoshiro256, eta: float = EDX_ETA) -> BanditInstance:
    """Arms with mu ~ U[0, 1] and r ~ U(0, 0.40]."""
    return _synth(n, rng, eta, 1.0, 0.40, "edx")


def normalize_minmax(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0 or np.any(~np.isfinite(v)):
        raise InvalidInputError("min-max normalisation needs finite values")
    lo, hi = v.min(), v.max()
    if hi == lo:
        raise InvalidInputError("min-max normalisation of a constant vector is undefined")
    return (v - lo) / (hi - lo)
