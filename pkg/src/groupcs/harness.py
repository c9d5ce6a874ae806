"""End-to-end experiment harness: generate -> certify -> solve -> verify.

Each trial draws a sensing matrix and a group-sparse (or compressible)
signal from per-trial random streams derived from the master seed, so
runs replay identically regardless of execution order.  Trial rows are
written to a versioned CSV with round-trip float formatting; aggregate
results go to a JSON summary.  Wall-clock time is kept out of the CSV so
replays are bit-identical.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import evaluate_bounds, verify_recovery_bound
from .groups import GksFamily, GroupPartition, enumerate_gks, load_partition, sparsity_index
from .norms import (
    L1Norm,
    SortedL1Norm,
    UnsupportedPair,
    pair_constants,
    parse_norm_spec,
)
from .sensing import certify_grip, gen_bernoulli, gen_gaussian
from .solver import SolveOptions, solve

__all__ = [
    "SignalModel",
    "ExperimentConfig",
    "TrialRecord",
    "ExperimentResult",
    "parse_config",
    "draw_signal",
    "run_experiment",
    "CSV_SCHEMA",
]

CSV_SCHEMA = "groupcs-trials-v1"

_CSV_COLUMNS = [
    "trial",
    "status",
    "m",
    "n",
    "k",
    "rho_low_k",
    "rho_high_k",
    "rho_low_2k",
    "rho_high_2k",
    "delta_k",
    "delta_2k",
    "injective_2k",
    "compressible_sb",
    "compressible_db",
    "sigma",
    "error",
    "bound_sb",
    "bound_db",
    "slack_sb",
    "slack_db",
    "iterations",
    "converged",
    "objective",
    "feasibility_residual",
    "message",
]


@dataclass(frozen=True)
class SignalModel:
    """'exact' puts unit-norm noise on one random family member; 'compressible'
    adds an off-support tail decaying geometrically at rate ``decay`` over the
    randomly ordered remaining indices."""

    kind: str = "exact"
    decay: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exact", "compressible"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if not 0.0 <= self.decay < 1.0:
            raise ValueError("decay must lie in [0, 1)")


@dataclass
class ExperimentConfig:
    n: int
    m: int
    k: int
    partition: GroupPartition
    trials: int = 10
    seed: int = 0
    ensemble: str = "gaussian"
    penalty_spec: str = "l1"
    approx_spec: str | None = None
    signal: SignalModel = field(default_factory=SignalModel)
    eps: float = 0.0
    noise_rule: str = "sphere"
    matrix_mode: str = "per-trial"
    cap: int = 10**6
    max_iters: int = 100_000
    csv_out: str | None = None
    json_out: str | None = None

    def __post_init__(self):
        if self.ensemble not in ("gaussian", "bernoulli"):
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        if self.noise_rule not in ("sphere", "ball"):
            raise ValueError(f"unknown noise rule {self.noise_rule!r}")
        if self.matrix_mode not in ("per-trial", "shared"):
            raise ValueError(f"unknown matrix mode {self.matrix_mode!r}")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.eps < 0.0:
            raise ValueError("eps must be non-negative")
        if self.partition.n != self.n:
            raise ValueError("partition does not match n")


@dataclass
class TrialRecord:
    trial: int
    status: str = "ok"
    message: str = ""
    rho_low_k: float | None = None
    rho_high_k: float | None = None
    rho_low_2k: float | None = None
    rho_high_2k: float | None = None
    delta_k: float | None = None
    delta_2k: float | None = None
    injective_2k: bool | None = None
    compressible_sb: bool | None = None
    compressible_db: bool | None = None
    sigma: float | None = None
    error: float | None = None
    bound_sb: float | None = None
    bound_db: float | None = None
    slack_sb: float | None = None
    slack_db: float | None = None
    iterations: int | None = None
    converged: bool | None = None
    objective: float | None = None
    feasibility_residual: float | None = None
    wall_time: float | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    summary: dict


def _parse_partition_token(token: str, n: int) -> GroupPartition:
    token = token.strip()
    if token == "singleton":
        return GroupPartition.singletons(n)
    if token.startswith("uniform:"):
        return GroupPartition.uniform(n, int(token.split(":", 1)[1]))
    return load_partition(token)


def parse_config(path) -> ExperimentConfig:
    """Read a flat ``key = value`` config file ('#' starts a comment)."""
    raw = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"cannot parse config line {line!r}")
            key, val = line.split("=", 1)
            raw[key.strip()] = val.strip()
    try:
        n = int(raw["n"])
        m = int(raw["m"])
        k = int(raw["k"])
    except KeyError as exc:
        raise ValueError(f"config is missing required key {exc}") from exc
    partition = _parse_partition_token(raw.get("partition", "singleton"), n)
    signal_tok = raw.get("signal", "exact")
    if signal_tok == "exact":
        signal = SignalModel("exact")
    elif signal_tok.startswith("compressible:"):
        signal = SignalModel("compressible", float(signal_tok.split(":", 1)[1]))
    else:
        raise ValueError(f"cannot parse signal spec {signal_tok!r}")
    return ExperimentConfig(
        n=n,
        m=m,
        k=k,
        partition=partition,
        trials=int(raw.get("trials", 10)),
        seed=int(raw.get("seed", 0)),
        ensemble=raw.get("ensemble", "gaussian"),
        penalty_spec=raw.get("penalty", "l1"),
        approx_spec=raw.get("approx"),
        signal=signal,
        eps=float(raw.get("eps", 0.0)),
        noise_rule=raw.get("noise", "sphere"),
        matrix_mode=raw.get("matrix", "per-trial"),
        cap=int(raw.get("cap", 10**6)),
        max_iters=int(raw.get("max_iters", 100_000)),
        csv_out=raw.get("csv_out"),
        json_out=raw.get("json_out"),
    )


def draw_signal(model: SignalModel, partition: GroupPartition, k: int, seed, cap: int = 10**6):
    """Draw a signal per the model; see `SignalModel`.  Deterministic in seed."""
    family = enumerate_gks(partition, k, cap=cap)
    rng = np.random.default_rng(seed)
    return _draw_signal(model, family, rng)


def _draw_signal(model: SignalModel, family: GksFamily, rng) -> np.ndarray:
    if not family.sets:
        raise ValueError("family is empty")
    n = family.partition.n
    sup = family.sets[rng.integers(len(family.sets))]
    x = np.zeros(n)
    vals = rng.standard_normal(len(sup))
    nv = np.linalg.norm(vals)
    if nv == 0.0:
        vals[:] = 1.0
        nv = np.linalg.norm(vals)
    x[list(sup)] = vals / nv
    if model.kind == "compressible" and model.decay > 0.0:
        rest = [i for i in range(n) if i not in set(sup)]
        rng.shuffle(rest)
        for j, idx in enumerate(rest, start=1):
            x[idx] = model.decay**j * (1.0 if rng.random() < 0.5 else -1.0)
    return x


def _draw_noise(rule: str, eps: float, m: int, rng) -> np.ndarray:
    if eps == 0.0:
        return np.zeros(m)
    u = rng.standard_normal(m)
    u /= np.linalg.norm(u)
    if rule == "ball":
        return eps * rng.random() ** (1.0 / m) * u
    return eps * u


def _norms_for(config: ExperimentConfig):
    penalty = parse_norm_spec(config.penalty_spec, config.partition, config.n)
    if config.approx_spec is not None:
        approx = parse_norm_spec(config.approx_spec, config.partition, config.n)
    elif isinstance(penalty, SortedL1Norm):
        approx = L1Norm()
    else:
        approx = penalty
    return approx, penalty


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run all trials, write the CSV/JSON outputs, and return the records.

    Per-trial failures are recorded with status 'error' and do not stop
    the run.  The summary counts certified-compressible trials separately;
    callers treat a run with zero successful trials as a failure.
    """
    approx, penalty = _norms_for(config)
    family_k = enumerate_gks(config.partition, config.k, cap=config.cap)
    opts = SolveOptions(max_iters=config.max_iters)

    shared_matrix = None
    if config.matrix_mode == "shared":
        shared_matrix = _gen_matrix(config, [config.seed, 11])

    records = []
    t_run = time.perf_counter()
    for trial in range(config.trials):
        t0 = time.perf_counter()
        rec = TrialRecord(trial=trial)
        try:
            _run_trial(config, trial, rec, approx, penalty, family_k, opts, shared_matrix)
        except Exception as exc:  # noqa: BLE001 - per-trial isolation
            rec.status = "error"
            rec.message = f"{type(exc).__name__}: {exc}"
        rec.wall_time = time.perf_counter() - t0
        records.append(rec)
    total_time = time.perf_counter() - t_run

    summary = _summarize(config, records, total_time)
    if config.csv_out:
        _write_csv(config.csv_out, records, config)
    if config.json_out:
        with open(config.json_out, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return ExperimentResult(config=config, records=records, summary=summary)


def _gen_matrix(config: ExperimentConfig, seed):
    gen = gen_gaussian if config.ensemble == "gaussian" else gen_bernoulli
    return gen(config.m, config.n, seed)


def _run_trial(config, trial, rec, approx, penalty, family_k, opts, shared_matrix):
    A = shared_matrix
    if A is None:
        A = _gen_matrix(config, [config.seed, trial, 11])
    cert_k = certify_grip(A, config.partition, config.k, cap=config.cap)
    cert_2k = certify_grip(A, config.partition, 2 * config.k, cap=config.cap)
    rec.rho_low_k = cert_k.rho_low
    rec.rho_high_k = cert_k.rho_high
    rec.rho_low_2k = cert_2k.rho_low
    rec.rho_high_2k = cert_2k.rho_high
    rec.delta_k = cert_k.delta
    rec.delta_2k = cert_2k.delta
    rec.injective_2k = cert_2k.injective

    try:
        consts = pair_constants(approx, penalty, family_k, mode="analytic")
    except UnsupportedPair:
        consts = pair_constants(
            approx, penalty, family_k, mode="empirical", trials=50,
            seed=[config.seed, trial, 14],
        )
    report = evaluate_bounds(consts, cert_k, cert_2k)
    rec.compressible_sb = report.compressible_sb
    rec.compressible_db = report.compressible_db

    x = _draw_signal(config.signal, family_k, np.random.default_rng([config.seed, trial, 12]))
    noise = _draw_noise(
        config.noise_rule, config.eps, config.m,
        np.random.default_rng([config.seed, trial, 13]),
    )
    y = A.entries @ x + noise

    result = solve(A, y, config.eps, penalty, opts)
    rec.iterations = result.iterations
    rec.converged = result.converged
    rec.objective = result.objective
    rec.feasibility_residual = result.feasibility_residual

    rec.sigma = sparsity_index(x, approx, family_k)
    check = verify_recovery_bound(x, result.x_hat, rec.sigma, config.eps, report)
    rec.error = check.error
    rec.bound_sb = check.bound_sb
    rec.bound_db = check.bound_db
    rec.slack_sb = check.slack_sb
    rec.slack_db = check.slack_db


def _summarize(config, records, total_time) -> dict:
    ok = [r for r in records if r.status == "ok"]
    cert_sb = [r for r in ok if r.compressible_sb]
    cert_db = [r for r in ok if r.compressible_db]
    errors = [r.error for r in ok if r.error is not None]

    def _stats(vals):
        if not vals:
            return None
        arr = np.asarray(vals, dtype=float)
        return {
            "min": float(arr.min()),
            "median": float(np.median(arr)),
            "max": float(arr.max()),
        }

    return {
        "schema": CSV_SCHEMA,
        "n": config.n,
        "m": config.m,
        "k": config.k,
        "trials": config.trials,
        "seed": config.seed,
        "ensemble": config.ensemble,
        "penalty": config.penalty_spec,
        "approx": config.approx_spec,
        "signal": config.signal.kind,
        "decay": config.signal.decay,
        "eps": config.eps,
        "noise": config.noise_rule,
        "matrix_mode": config.matrix_mode,
        "trials_ok": len(ok),
        "trials_error": len(records) - len(ok),
        "trials_compressible_sb": len(cert_sb),
        "trials_compressible_db": len(cert_db),
        "error_stats": _stats(errors),
        "slack_sb_stats": _stats([r.slack_sb for r in cert_sb if r.slack_sb is not None]),
        "slack_db_stats": _stats([r.slack_db for r in cert_db if r.slack_db is not None]),
        "wall_time_total": total_time,
    }


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, records, config) -> None:
    lines = [f"# schema={CSV_SCHEMA}", ",".join(_CSV_COLUMNS)]
    for rec in records:
        row = {
            "trial": rec.trial,
            "status": rec.status,
            "m": config.m,
            "n": config.n,
            "k": config.k,
            "message": rec.message,
        }
        for col in _CSV_COLUMNS:
            if col in row:
                continue
            row[col] = getattr(rec, col)
        lines.append(",".join(_format_cell(row[col]) for col in _CSV_COLUMNS))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
