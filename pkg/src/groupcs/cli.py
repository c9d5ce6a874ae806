"""Command-line interface.

Subcommands: gen-matrix, certify, decompose, solve, bounds, sample-size,
experiment.  Exit codes: 0 on success, 1 on usage or run errors, 2 when an
experiment produced zero successful trials.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bounds import evaluate_bounds
from .groups import enumerate_gks, optimal_decomposition, sparsity_index
from .harness import _parse_partition_token, parse_config, run_experiment
from .norms import UnsupportedPair, pair_constants, parse_norm_spec
from .samplesize import SampleSizeQuery, min_measurements
from .sensing import certify_grip, gen_bernoulli, gen_gaussian, load_matrix, save_matrix
from .solver import SolveOptions, solve


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the interface reserves
    # 2 for "no successful trials", so remap usage errors to 1.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_vector(path) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0]
            vals.extend(float(tok) for tok in line.split())
    return np.asarray(vals, dtype=float)


def _print_record(pairs) -> None:
    for key, val in pairs:
        print(f"{key} = {val}")


def _cmd_gen_matrix(args) -> int:
    gen = gen_gaussian if args.ensemble == "gaussian" else gen_bernoulli
    A = gen(args.m, args.n, args.seed)
    save_matrix(A, args.out)
    print(f"wrote {args.m}x{args.n} {args.ensemble} matrix to {args.out}")
    return 0


def _cmd_certify(args) -> int:
    A = load_matrix(args.matrix)
    partition = _parse_partition_token(args.partition, A.n)
    cert = certify_grip(A, partition, args.order, cap=args.cap)
    _print_record(
        [
            ("order", cert.order),
            ("rho_low", repr(cert.rho_low)),
            ("rho_high", repr(cert.rho_high)),
            ("delta", repr(cert.delta)),
            ("family_size", cert.family_size),
            ("injective", int(cert.injective)),
            ("partition_hash", cert.partition_hash),
        ]
    )
    return 0


def _cmd_decompose(args) -> int:
    x = _load_vector(args.x)
    partition = _parse_partition_token(args.partition, x.shape[0])
    norm = parse_norm_spec(args.norm, partition, x.shape[0])
    family = enumerate_gks(partition, args.k, cap=args.cap)
    pieces = optimal_decomposition(x, norm, family)
    _print_record(
        [
            ("k", args.k),
            ("family_size", len(family)),
            ("pieces", len(pieces)),
            ("sparsity_index", repr(sparsity_index(x, norm, family))),
        ]
    )
    for i, (sup, _piece) in enumerate(pieces):
        print(f"support_{i} = {' '.join(map(str, sup))}")
    return 0


def _cmd_solve(args) -> int:
    A = load_matrix(args.matrix)
    y = _load_vector(args.y)
    partition = None
    if args.partition:
        partition = _parse_partition_token(args.partition, A.n)
    penalty = parse_norm_spec(args.norm, partition, A.n)
    opts = SolveOptions(max_iters=args.max_iters)
    result = solve(A, y, args.eps, penalty, opts)
    payload = {
        "x_hat": [repr(float(v)) for v in result.x_hat],
        "iterations": result.iterations,
        "converged": result.converged,
        "feasibility_residual": result.feasibility_residual,
        "objective": result.objective,
        "rank_deficient": result.rank_deficient,
        "eps": args.eps,
        "norm": args.norm,
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    print(
        f"converged={result.converged} iterations={result.iterations} "
        f"objective={result.objective:.6g} "
        f"feasibility_residual={result.feasibility_residual:.3g}"
    )
    return 0


def _cmd_bounds(args) -> int:
    A = load_matrix(args.matrix)
    partition = _parse_partition_token(args.partition, A.n)
    penalty = parse_norm_spec(args.penalty, partition, A.n)
    approx = (
        parse_norm_spec(args.approx, partition, A.n) if args.approx else penalty
    )
    family = enumerate_gks(partition, args.k, cap=args.cap)
    try:
        consts = pair_constants(approx, penalty, family, mode=args.mode)
    except UnsupportedPair:
        consts = pair_constants(approx, penalty, family, mode="empirical")
    cert_k = certify_grip(A, partition, args.k, cap=args.cap)
    cert_2k = certify_grip(A, partition, 2 * args.k, cap=args.cap)
    report = evaluate_bounds(consts, cert_k, cert_2k)
    text = json.dumps(report.as_dict(), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_sample_size(args) -> int:
    if args.groups is not None or args.max_active is not None:
        if args.groups is None or args.max_active is None:
            raise ValueError("--groups and --max-active go together")
        query = SampleSizeQuery(
            n=args.n,
            k=args.k,
            delta=args.delta,
            zeta=args.zeta,
            mode="group",
            num_groups=args.groups,
            max_active=args.max_active,
        )
    else:
        query = SampleSizeQuery(n=args.n, k=args.k, delta=args.delta, zeta=args.zeta)
    plan = min_measurements(query)
    _print_record(
        [
            ("mode", query.mode),
            ("m", plan.m),
            ("value", repr(plan.value)),
            ("prefactor", repr(plan.prefactor)),
            ("term_order", repr(plan.term_order)),
            ("term_family", repr(plan.term_family)),
            ("term_confidence", repr(plan.term_confidence)),
        ]
    )
    return 0


def _cmd_experiment(args) -> int:
    config = parse_config(args.config)
    result = run_experiment(config)
    summary = result.summary
    print(
        f"trials={summary['trials']} ok={summary['trials_ok']} "
        f"errors={summary['trials_error']} "
        f"compressible_sb={summary['trials_compressible_sb']} "
        f"compressible_db={summary['trials_compressible_db']}"
    )
    if summary["trials_ok"] == 0:
        print("no successful trials", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="groupcs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-matrix", help="generate a sensing matrix file")
    p.add_argument("--ensemble", choices=["gaussian", "bernoulli"], default="gaussian")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_matrix)

    p = sub.add_parser("certify", help="certify group restricted isometry constants")
    p.add_argument("--matrix", required=True)
    p.add_argument("--partition", default="singleton",
                   help="partition file, 'singleton', or 'uniform:<size>'")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--cap", type=int, default=10**6)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("decompose", help="optimal group-sparse decomposition")
    p.add_argument("--x", required=True, help="vector file (whitespace-separated)")
    p.add_argument("--partition", default="singleton")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--norm", default="l1")
    p.add_argument("--cap", type=int, default=10**6)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("solve", help="constrained norm minimization")
    p.add_argument("--matrix", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--norm", default="l1")
    p.add_argument("--partition", default=None)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--out", default=None, help="write the result as JSON")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bounds", help="evaluate recovery-bound coefficients")
    p.add_argument("--matrix", required=True)
    p.add_argument("--partition", default="singleton")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--penalty", default="l1")
    p.add_argument("--approx", default=None)
    p.add_argument("--mode", choices=["analytic", "empirical"], default="analytic")
    p.add_argument("--cap", type=int, default=10**6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("sample-size", help="measurement-count planning")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--groups", type=int, default=None)
    p.add_argument("--max-active", type=int, default=None)
    p.set_defaults(func=_cmd_sample_size)

    p = sub.add_parser("experiment", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"groupcs: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
