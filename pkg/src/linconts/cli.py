"""Experiment runner.

    linconts run    --synthetic coupon --n 50 --horizon 50000 --runs 16 --out results/
    linconts bounds --instance arms.csv --eta 0.5 --gamma 1 --horizon 1000
    linconts gen    --synthetic edx --n 290 --instance-seed 3 --out edx.csv

Run ``r`` of each algorithm uses seed ``base_seed + r``. A flat
``key = value`` config file may be given with ``--config``; command-line
flags override it.

Exit codes: 0 success, 1 invalid configuration or input, 2 infeasible or
degenerate instance, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ._rng import Xoshiro256
from .algorithms import POLICIES, run_policy
from .environment import (
    BanditInstance,
    load_arms_csv,
    synth_coupon_like,
    synth_edx_like,
    write_arms_csv,
)
from .exceptions import (
    CsvFormatError,
    DegeneracyError,
    DomainError,
    InfeasibleError,
    InvalidInputError,
)
from .metrics import aggregate_runs, log_grid, metric_series
from .theory import theorem_bounds

log = logging.getLogger("linconts")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3

AGGREGATE_COLUMNS = (
    "t", "regret_mean", "regret_std", "violation_mean", "violation_std",
    "cumreward_mean", "cumreward_std", "ratio_mean", "ratio_std",
)
TRACE_HEADER = "t,arm,reward_event,collected_reward"
SYNTHETIC = {"coupon": synth_coupon_like, "edx": synth_edx_like}


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    instance: str | None = None
    synthetic: str | None = None
    n: int = 50
    instance_seed: int = 0
    eta: float | None = None
    horizon: float = 50_000
    runs: int = 16
    seed: int = 0
    algo: list[str] = field(default_factory=lambda: list(POLICIES))
    klucb_c: float = 0.0
    gamma: float = 0.5
    out: str | None = None
    jobs: int = 1
    grid_points: int = 200

    def validate(self, simulate: bool = True) -> None:
        if (self.instance is None) == (self.synthetic is None):
            raise ConfigError("give exactly one of --instance or --synthetic")
        if self.synthetic is not None and self.synthetic not in SYNTHETIC:
            raise ConfigError(f"--synthetic must be one of {sorted(SYNTHETIC)}")
        if self.instance is not None and self.eta is None:
            raise ConfigError("--eta is required with --instance")
        if self.eta is not None and not (0.0 <= self.eta <= 1.0):
            raise ConfigError(f"--eta must lie in [0, 1], got {self.eta}")
        if not (0.0 < self.gamma <= 1.0):
            raise ConfigError(f"--gamma must lie in (0, 1], got {self.gamma}")
        if self.runs < 1:
            raise ConfigError("--runs must be >= 1")
        if self.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if self.seed < 0 or self.instance_seed < 0:
            raise ConfigError("seeds must be non-negative")
        bad = [a for a in self.algo if a not in POLICIES]
        if bad or not self.algo:
            raise ConfigError(f"--algo must be a subset of {POLICIES}, got {self.algo}")
        if simulate and (self.horizon != int(self.horizon) or self.horizon < 1):
            raise ConfigError(f"--horizon must be a positive integer, got {self.horizon}")
        if self.grid_points < 2:
            raise ConfigError("--grid-points must be >= 2")


_FIELD_TYPES = {
    "instance": str, "synthetic": str, "n": int, "instance_seed": int, "eta": float,
    "horizon": float, "runs": int, "seed": int, "klucb_c": float, "gamma": float,
    "out": str, "jobs": int, "grid_points": int,
}


def _parse_algo(text: str) -> list[str]:
    return [a.strip().lower().replace("-", "") for a in text.split(",") if a.strip()]


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            if key == "algo":
                values[key] = _parse_algo(val)
            elif key in _FIELD_TYPES:
                values[key] = _FIELD_TYPES[key](val)
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {val!r}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linconts", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--instance", help="arm CSV with header arm_id,mu,r")
        p.add_argument("--synthetic", choices=sorted(SYNTHETIC))
        p.add_argument("--n", type=int, help="number of synthetic arms")
        p.add_argument("--instance-seed", type=int, help="seed for the synthetic generator")
        p.add_argument("--eta", type=float, help="constraint threshold")
        p.add_argument("--out", help=out_help)

    run = sub.add_parser("run", help="simulate policies and write traces and aggregates")
    common(run, "output directory")
    run.add_argument("--horizon", type=float)
    run.add_argument("--runs", type=int)
    run.add_argument("--seed", type=int, help="base seed; run r uses seed + r")
    run.add_argument("--algo", type=_parse_algo, help="comma list of linconts,linconklucb")
    run.add_argument("--klucb-c", type=float)
    run.add_argument("--gamma", type=float)
    run.add_argument("--jobs", type=int)
    run.add_argument("--grid-points", type=int)

    bounds = sub.add_parser("bounds", help="evaluate bound terms without simulating")
    common(bounds, "directory for summary.json (stdout always)")
    bounds.add_argument("--horizon", type=float)
    bounds.add_argument("--gamma", type=float)

    gen = sub.add_parser("gen", help="write a synthetic instance to CSV")
    common(gen, "CSV path (stdout if omitted)")
    return parser


def config_from_args(args) -> ExperimentConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in list(_FIELD_TYPES) + ["algo"]:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return ExperimentConfig(**values)


def make_instance(cfg: ExperimentConfig) -> BanditInstance:
    if cfg.instance is not None:
        inst = load_arms_csv(cfg.instance)
        return inst.with_eta(cfg.eta)
    gen = SYNTHETIC[cfg.synthetic]
    rng = Xoshiro256(cfg.instance_seed)
    if cfg.eta is None:
        return gen(cfg.n, rng)
    return gen(cfg.n, rng, eta=cfg.eta)


def _f(v) -> str:
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def write_trace(trace, instance, path: Path) -> None:
    r_text = [repr(float(v)) for v in instance.r]
    lines = [TRACE_HEADER]
    for k, (arm, ev) in enumerate(zip(trace.arms.tolist(), trace.events.tolist()), 1):
        lines.append(f"{k},{arm},{ev},{r_text[arm] if ev else '0.0'}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_aggregate(agg, path: Path) -> None:
    lines = [",".join(AGGREGATE_COLUMNS)]
    for j, t in enumerate(agg.t_grid.tolist()):
        row = [str(t)]
        for name in ("regret", "violation", "cum_reward", "ratio"):
            row += [_f(agg.mean[name][j]), _f(agg.std[name][j])]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def bound_summary(instance: BanditInstance, gamma: float, horizon: float) -> dict:
    rep = theorem_bounds(instance, gamma, horizon)
    xi = [None] * instance.n_arms
    for a in rep.arms:
        xi[a.index] = _json_float(a.xi)
    return {
        "instance": instance.to_dict(),
        "x_star": [float(v) for v in rep.x_star],
        "r_star": rep.r_star,
        "support": list(rep.support),
        "duals": {
            "lambda": rep.duals.lam,
            "nu": rep.duals.nu,
            "psi": [float(v) for v in rep.duals.psi],
        },
        "xi": xi,
        "gamma": gamma,
        "horizon": horizon,
        "bounds": rep.bounds_dict(),
        "suboptimal_arms": [
            {
                "arm": a.index,
                "mu": a.mu,
                "xi": _json_float(a.xi),
                "delta_plus": float(a.delta_plus),
                "small_delta_plus": float(a.small_delta_plus),
                "kl_mu_xi": _json_float(a.kl_mu_xi),
                "flags": list(a.flags),
            }
            for a in rep.arms
        ],
        "notes": rep.notes,
    }


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def run_experiment(cfg: ExperimentConfig) -> int:
    instance = make_instance(cfg)
    horizon = int(cfg.horizon)
    if horizon < instance.n_arms:
        raise ConfigError(f"--horizon {horizon} is below the number of arms {instance.n_arms}")
    if not instance.feasible:
        raise InfeasibleError(
            f"infeasible instance: max mu={instance.mu.max():.6g} < eta={instance.eta:.6g}"
        )
    summary = bound_summary(instance, cfg.gamma, horizon)
    grid = log_grid(horizon, cfg.grid_points)

    tasks = [(algo, k) for algo in cfg.algo for k in range(cfg.runs)]

    def one(task):
        algo, k = task
        trace = run_policy(algo, instance, horizon, cfg.seed + k, klucb_c=cfg.klucb_c)
        return trace, metric_series(trace, instance, grid)

    if cfg.jobs == 1:
        results = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(one, tasks))

    out = Path(cfg.out or "results")
    (out / "traces").mkdir(parents=True, exist_ok=True)
    final = {}
    for algo in cfg.algo:
        series = []
        for (a, k), (trace, s) in zip(tasks, results):
            if a != algo:
                continue
            write_trace(trace, instance, out / "traces" / f"{algo}_run{k:03d}.csv")
            series.append(s)
        agg = aggregate_runs(series)
        write_aggregate(agg, out / f"aggregate_{algo}.csv")
        final[algo] = {
            name: _json_float(agg.mean[name][-1])
            for name in ("regret", "violation", "cum_reward", "ratio")
        }
        log.info("%s: final mean regret %.4g, violation %.4g", algo,
                 agg.mean["regret"][-1], agg.mean["violation"][-1])
    summary["experiment"] = {
        "algorithms": cfg.algo,
        "runs": cfg.runs,
        "base_seed": cfg.seed,
        "horizon": horizon,
        "klucb_c": cfg.klucb_c,
        "grid_points": int(grid.size),
        "final_mean": final,
    }
    (out / "summary.json").write_text(_dump(summary), encoding="utf-8")
    return EXIT_OK


def report_bounds(cfg: ExperimentConfig, stream=None) -> int:
    instance = make_instance(cfg)
    if not instance.feasible:
        raise InfeasibleError(
            f"infeasible instance: max mu={instance.mu.max():.6g} < eta={instance.eta:.6g}"
        )
    text = _dump(bound_summary(instance, cfg.gamma, cfg.horizon))
    (stream or sys.stdout).write(text)
    if cfg.out is not None:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(text, encoding="utf-8")
    return EXIT_OK


def generate(cfg: ExperimentConfig, stream=None) -> int:
    if cfg.synthetic is None:
        raise ConfigError("gen needs --synthetic")
    instance = make_instance(cfg)
    comment = f"synthetic {cfg.synthetic} n={cfg.n} instance_seed={cfg.instance_seed} eta={instance.eta}"
    if cfg.out is None:
        stream = stream or sys.stdout
        stream.write(f"# {comment}\narm_id,mu,r\n")
        for i, arm in enumerate(instance.arms, 1):
            stream.write(f"{i},{arm.mu!r},{arm.r!r}\n")
    else:
        write_arms_csv(instance, cfg.out, comment=comment)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "gen":
            return generate(cfg)
        if args.command == "bounds":
            cfg.validate(simulate=False)
            return report_bounds(cfg)
        cfg.validate()
        return run_experiment(cfg)
    except (ConfigError, CsvFormatError, InvalidInputError, DomainError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (InfeasibleError, DegeneracyError) as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
