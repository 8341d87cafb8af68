"""Command-line entry point: gen | run | verify | bench.

Exit codes: 0 pass, 1 failure (verification miss, file mismatch, runtime
error), 2 usage. All randomness flows from the declared seeds, so a
repeated invocation reproduces its output files byte for byte.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as sio
from .bench import bench_suite, run_sampler, write_csv
from .errors import SpecstreamError, UnknownSuite
from .instances import gen_gaussian, gen_kd_multigraph, gen_mu_controlled, permute
from .verify import mu as measure_mu
from .verify import verify

CLI_ALGOS = ("online", "optimal", "scaled", "improved")
CLI_PLUGS = ("self", "resparsify", "passthrough")


def _cmd_gen(args) -> int:
    if args.kind == "kd":
        if args.d is None or args.copies is None:
            raise SpecstreamError("gen --kind kd needs --d and --copies")
        stream = gen_kd_multigraph(args.d, args.copies)
    elif args.kind == "gaussian":
        if args.n is None or args.d is None:
            raise SpecstreamError("gen --kind gaussian needs --n and --d")
        stream = gen_gaussian(args.n, args.d, args.seed)
    else:
        if args.d is None or args.levels is None or args.gamma is None:
            raise SpecstreamError("gen --kind mu needs --d, --levels and --gamma")
        stream = gen_mu_controlled(args.d, args.levels, args.gamma)
    if args.perm_seed is not None:
        stream = permute(stream, args.perm_seed)
    sio.write_stream(args.out, stream)
    print(f"wrote {args.out}: n={stream.n} d={stream.d} "
          f"meta={json.dumps(stream.meta, sort_keys=True)}")
    return 0


def _algo_key(args) -> str:
    if args.algo == "improved":
        return f"improved-{args.plug}"
    return args.algo


def _cmd_run(args) -> int:
    stream = sio.read_stream(args.input)
    seed_perm = args.perm_seed if args.perm_seed is not None else 0
    if args.perm_seed is not None:
        stream = permute(stream, args.perm_seed)
    algo = _algo_key(args)
    sketch, info = run_sampler(
        algo, stream, args.eps, args.seed,
        c_mult=args.c_mult, k=args.k,
        use_jl=args.jl, jl_c=args.jl_c,
        plug_beta=args.plug_beta, plug_capacity_mult=args.plug_capacity_mult,
        ortho_tol=args.ortho_tol, rank_tol=args.rank_tol,
    )
    meta = {
        "algo": algo,
        "eps": args.eps,
        "seed_sample": args.seed,
        "seed_perm": seed_perm,
        "source": stream.meta,
    }
    sio.write_sketch(args.out, sketch, meta)
    diag_path = args.diag if args.diag else args.out + ".diag"
    _write_diag(diag_path, algo, args, stream, sketch, info)
    print(f"wrote {args.out}: {sketch.n_rows} of {stream.n} rows "
          f"(score_total={info['score_total']:.6g})")
    return 0


def _write_diag(path, algo, args, stream, sketch, info) -> None:
    lines = [
        json.dumps({
            "kind": "run", "algo": algo, "eps": args.eps,
            "seed_sample": args.seed,
            "seed_perm": args.perm_seed if args.perm_seed is not None else 0,
            "n": stream.n, "d": stream.d,
        }, sort_keys=True),
    ]
    scores = info.get("scores")
    if scores is not None:
        lines.append(json.dumps({
            "kind": "scores",
            "values": [float(s) for s in np.asarray(scores)],
        }, sort_keys=True))
    lines.append(json.dumps({
        "kind": "summary",
        "sketch_rows": sketch.n_rows,
        "score_total": float(info["score_total"]),
        "pinv_recomputes": int(info["pinv_recomputes"]),
        "drift_events": int(info["drift_events"]),
        "max_working_rows": int(info["max_working_rows"]),
    }, sort_keys=True))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_diag_scores(path) -> list[float] | None:
    with open(path) as fh:
        for line in fh:
            obj = json.loads(line)
            if obj.get("kind") == "scores":
                return obj["values"]
    return None


def _cmd_verify(args) -> int:
    stream = sio.read_stream(args.stream)
    if args.mu:
        value = measure_mu(stream)
        print(f"mu = {value:.17g}")
        if args.sketch is None:
            return 0
    if args.sketch is None:
        raise SpecstreamError("verify needs --sketch (or --mu alone)")
    sketch, _meta = sio.read_sketch(args.sketch)
    scores = _read_diag_scores(args.diag) if args.diag else None
    eps_actual, overestimate_ok = verify(stream, sketch, scores=scores)
    print(f"eps_actual = {eps_actual:.17g}")
    if overestimate_ok is None:
        print("overestimate audit: skipped (no score log)")
    else:
        print(f"overestimate audit: {'ok' if overestimate_ok else 'VIOLATED'}")
    ok = True
    if args.eps is not None:
        ok = eps_actual <= args.eps
        print(f"{'PASS' if ok else 'FAIL'} (eps_actual {'<=' if ok else '>'} {args.eps:g})")
    if overestimate_ok is False:
        ok = False
    return 0 if ok else 1


def _cmd_bench(args) -> int:
    records, summary = bench_suite(args.suite, threads=args.threads)
    if args.out:
        write_csv(args.out, records)
        print(f"wrote {args.out}: {len(records)} records")
    for key, value in summary.items():
        if key in ("suite", "pass"):
            continue
        print(f"{key} = {value}")
    ok = bool(summary["pass"])
    print(f"{summary['suite']}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="specstream",
        description="Streaming spectral row sampling: generate, run, verify, bench.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance stream file")
    g.add_argument("--kind", choices=("kd", "gaussian", "mu"), required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--copies", type=int)
    g.add_argument("--levels", type=int)
    g.add_argument("--gamma", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--perm-seed", type=int, default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="run a sampler over a stream file")
    r.add_argument("--algo", choices=CLI_ALGOS, required=True)
    r.add_argument("--plug", choices=CLI_PLUGS, default="self",
                   help="constant-approximation plug for --algo improved")
    r.add_argument("--eps", type=float, required=True)
    r.add_argument("--input", "-i", required=True)
    r.add_argument("--out", "-o", required=True)
    r.add_argument("--diag", default=None,
                   help="diagnostics sidecar path (default: <out>.diag)")
    r.add_argument("--seed", type=int, default=0, help="sampling seed")
    r.add_argument("--perm-seed", type=int, default=None,
                   help="permute the input stream before running")
    r.add_argument("--c-mult", type=float, default=None)
    r.add_argument("--k", type=int, default=None, help="seed block override")
    r.add_argument("--jl", action="store_true", help="score through a JL projection")
    r.add_argument("--jl-c", type=float, default=None)
    r.add_argument("--plug-beta", type=float, default=None)
    r.add_argument("--plug-capacity-mult", type=float, default=None)
    r.add_argument("--ortho-tol", type=float, default=None)
    r.add_argument("--rank-tol", type=float, default=None)
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("verify", help="verify a sketch against its stream")
    v.add_argument("--stream", required=True)
    v.add_argument("--sketch", default=None)
    v.add_argument("--eps", type=float, default=None)
    v.add_argument("--diag", default=None, help="sidecar with the score log")
    v.add_argument("--mu", action="store_true", help="measure the stream condition number")
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True,
                   choices=("eps-scaling", "n-scaling", "mu-scaling",
                            "algo-compare", "lower-bound-probe"))
    b.add_argument("--out", default=None, help="CSV output path")
    b.add_argument("--threads", type=int, default=None)
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnknownSuite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SpecstreamError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
