"""Command-line front end.

Every command writes its results under ``--out`` (a directory, created if
needed). CSV files start with one ``#`` comment line holding the resolved
configuration as JSON, followed by a header row. With an explicit
``--seed`` all outputs are byte-identical across runs.

Exit codes: 0 success, 2 usage/validation, 3 capacity, 4 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import circuit as circ
from . import qcore, stats
from .errors import CapacityError, NumericalError, ParseError
from .noise import NOISE_GRAMMAR, average_fidelity_decay, parse_noise
from .haar import child_rng
from .qcore import basis_state

EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_NUMERICAL = 4


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _noise(text):
    try:
        return parse_noise(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _config(args):
    """Resolved configuration echoed into every output file."""
    skip = {"func", "out"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if hasattr(v, "descriptor"):
            v = v.descriptor()
        elif isinstance(v, Path):
            v = str(v)
        cfg[k] = v
    cfg["version"] = __version__
    return cfg


def _csv_text(header, rows, meta):
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x
                    for x in row])
    return buf.getvalue()


def _write(out, name, text):
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _json(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _check_common(args):
    if getattr(args, "nq", 2) < 2:
        raise UsageError("--nq must be >= 2")
    if getattr(args, "trials", 1) < 1:
        raise UsageError("--trials must be >= 1")
    if any(m < 0 for m in getattr(args, "m_list", None) or []):
        raise UsageError("--m-list entries must be >= 0")


def cmd_qdist(args):
    _check_common(args)
    cfg = _config(args)
    ext = args.format
    n_q, trials, seed = args.nq, args.trials, args.seed
    reference = stats.cue_reference_q(n_q, trials, seed)
    target = stats.cue_q_mean(2 ** n_q)
    written, summary = [], []

    def emit(tag, report):
        meta = dict(cfg, report=report.metadata)
        if ext == "json":
            text = _json(dict(report.to_dict(), config=cfg))
        else:
            rows = zip(report.bin_edges[:-1], report.bin_edges[1:], report.counts.tolist())
            text = _csv_text(["bin_lo", "bin_hi", "count"], rows, meta)
        written.append(_write(args.out, f"qdist_{tag}.{ext}", text))

    for m in args.m_list:
        r = stats.run_q_ensemble(stats.CircuitSource(n_q, m), trials, seed, args.basis,
                                 args.bins, reference=reference)
        emit(f"m{m}", r)
        summary.append((m, r.q_mean, r.q_std, r.ks_to_cue, abs(r.q_mean - target)))
    base = stats.run_q_ensemble(stats.HaarSource(n_q), trials, seed, args.basis,
                                args.bins, reference=reference)
    emit("haar", base)

    meta = dict(cfg, cue_q_mean=target, haar_q_mean=base.q_mean, haar_q_std=base.q_std,
                haar_ks_to_cue=base.ks_to_cue)
    fit_rows = [r for r in summary if args.fit_min <= r[0] <= args.fit_max and r[4] > 0]
    if args.fit_max >= 0 and len(fit_rows) >= 2:
        fit = stats.fit_convergence_rate([r[0] for r in fit_rows], [r[4] for r in fit_rows])
        meta["convergence_fit"] = {"m_min": args.fit_min, "m_max": args.fit_max,
                                   "rate": -fit.slope, "intercept": fit.intercept,
                                   "r_squared": fit.r_squared}
    written.append(_write(args.out, "qdist_summary.csv", _csv_text(
        ["m", "q_mean", "q_std", "ks_to_cue", "abs_gap_to_cue"], summary, meta)))
    for row in summary:
        print("m={:<4d} q_mean={:.6f} q_std={:.6f} ks={:.4f} gap={:.3e}".format(*row))
    print(f"haar  q_mean={base.q_mean:.6f} (exact {target:.6f})")
    return written


def _distribution_cmd(args, kind):
    _check_common(args)
    qcore.check_capacity(args.nq, qcore.MAX_MATRIX_QUBITS, "matrix")
    cfg = _config(args)
    ext = args.format
    dim = 2 ** args.nq
    cdf = stats.element_cdf(dim)
    written, summary = [], []

    def collect(source):
        if kind == "elements":
            return stats.matrix_element_samples(source, args.trials, args.seed), 0
        res = stats.eigenvector_component_samples(source, args.trials, args.seed)
        return res.values, res.n_skipped

    sources = [(f"m{m}", m, stats.CircuitSource(args.nq, m)) for m in args.m_list]
    sources.append(("haar", "haar", stats.HaarSource(args.nq)))
    for tag, m, source in sources:
        values, skipped = collect(source)
        ks = stats.ks_statistic(values, cdf) if values.size else float("nan")
        meta = dict(cfg, **source.describe(), n_samples=int(values.size),
                    n_skipped=skipped, ks_to_cue=ks,
                    note="entries of one matrix are pooled and correlated")
        if ext == "json":
            text = _json({"metadata": meta, "values": values.tolist()})
        else:
            text = _csv_text(["trial", "value"], enumerate(values.tolist()), meta)
        written.append(_write(args.out, f"{kind}_{tag}.{ext}", text))
        summary.append((m, int(values.size), skipped, ks))
        print(f"{kind} {tag:<6} samples={values.size:<8d} skipped={skipped} ks={ks:.4f}")
    written.append(_write(args.out, f"{kind}_summary.csv", _csv_text(
        ["m", "n_samples", "n_skipped", "ks_to_cue"], summary, cfg)))
    return written


def cmd_elements(args):
    return _distribution_cmd(args, "elements")


def cmd_eigvecs(args):
    return _distribution_cmd(args, "eigvecs")


def cmd_decay(args):
    _check_common(args)
    if args.nmax < 1:
        raise UsageError("--nmax must be >= 1")
    if args.source == "circuit":
        source = stats.CircuitSource(args.nq, args.m)
    else:
        source = stats.HaarSource(args.nq)
    basis_state(args.nq, args.initial)
    curve = average_fidelity_decay(source, args.noise, args.nmax, args.trials, args.seed,
                                   (args.initial,), args.mode)[args.initial]
    cfg = _config(args)
    meta = dict(cfg, run=curve.metadata)
    written = []
    if args.format == "json":
        doc = {"metadata": meta, "n": curve.n_values.tolist(),
               "fidelity_mean": curve.fidelity.tolist(),
               "fidelity_std": curve.fidelity_std.tolist(),
               "purity_mean": curve.purity.tolist(),
               "purity_std": curve.purity_std.tolist()}
        written.append(_write(args.out, "decay.json", _json(doc)))
    else:
        curve.metadata = meta
        written.append(_write(args.out, "decay.csv", curve.to_csv()))
        written.append(_write(args.out, "decay_meta.json", _json(meta)))
    for n, f, fs, p, ps in curve.rows():
        print(f"n={n:<3d} fidelity={f:.10f} (std {fs:.2e}) purity={p:.10f}")
    return written


def cmd_concentration(args):
    _check_common(args)
    if any(n < 2 for n in args.nq_list):
        raise UsageError("--nq-list entries must be >= 2")
    scan = stats.concentration_scan(args.nq_list, args.trials, args.seed)
    cfg = _config(args)
    meta = dict(cfg)
    if scan.fit is not None:
        meta["log_std_fit"] = {"slope": scan.fit.slope, "intercept": scan.fit.intercept,
                               "r_squared": scan.fit.r_squared}
    rows = [(n, s, math.log(s)) for n, s in scan.rows()]
    if args.format == "json":
        text = _json({"metadata": meta, "rows": [
            {"n_q": n, "q_std": s, "log_q_std": ls} for n, s, ls in rows]})
    else:
        text = _csv_text(["n_q", "q_std", "log_q_std"], rows, meta)
    for n, s, _ in rows:
        print(f"n_q={n:<3d} q_std={s:.6f}")
    return [_write(args.out, f"concentration.{args.format}", text)]


def cmd_circuit_gen(args):
    _check_common(args)
    if args.m < 0:
        raise UsageError("--m must be >= 0")
    c = circ.sample_circuit(args.nq, args.m, child_rng(args.seed, stats.STREAM_UNITARY, 0), seed=args.seed)
    text = circ.serialize(c)
    if args.out is None:
        sys.stdout.write(text)
        return []
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return [path]


def cmd_circuit_apply(args):
    try:
        c = circ.deserialize(Path(args.circuit).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read circuit file: {exc}")
    psi = circ.apply_circuit(basis_state(c.n_q, args.basis), c)
    q = stats.meyer_wallach_q(psi)
    print(repr(q))
    return []


def build_parser():
    parser = argparse.ArgumentParser(
        prog="randcircuit",
        description="Pseudo-random circuits: CUE convergence diagnostics and "
                    "motion-reversal noise estimation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="root seed (default: drawn from system entropy, echoed in output)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", type=Path, default=Path("."),
                        help="output directory (default: current directory)")

    p = sub.add_parser("qdist", parents=[common],
                       help="distribution of Meyer-Wallach Q versus circuit depth")
    p.add_argument("--nq", type=int, required=True)
    p.add_argument("--m-list", type=_int_list, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--basis", type=int, default=0, help="initial basis state index")
    p.add_argument("--bins", type=int, default=stats.DEFAULT_BINS)
    p.add_argument("--fit-min", type=int, default=1,
                   help="smallest m used in the log-gap convergence fit")
    p.add_argument("--fit-max", type=int, default=-1,
                   help="largest m used in the fit (negative disables the fit)")
    p.set_defaults(func=cmd_qdist)

    for name, func, what in (("elements", cmd_elements, "matrix elements |U_ij|^2"),
                             ("eigvecs", cmd_eigvecs, "eigenvector components |v_k|^2")):
        p = sub.add_parser(name, parents=[common], help=f"pooled {what} versus depth")
        p.add_argument("--nq", type=int, required=True)
        p.add_argument("--m-list", type=_int_list, required=True)
        p.add_argument("--trials", type=int, default=100)
        p.set_defaults(func=func)

    p = sub.add_parser("decay", parents=[common],
                       help="motion-reversal fidelity and purity decay",
                       epilog=f"noise descriptors: {NOISE_GRAMMAR}")
    p.add_argument("--nq", type=int, required=True)
    p.add_argument("--noise", type=_noise, required=True,
                   help=f"one of: {NOISE_GRAMMAR}")
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--source", choices=("circuit", "haar"), default="circuit")
    p.add_argument("--m", type=int, default=20, help="circuit depth for --source circuit")
    p.add_argument("--initial", type=int, default=0)
    p.add_argument("--mode", choices=("pure", "density"), default=None,
                   help="simulation mode (default: pure for unitary noise)")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("concentration", parents=[common],
                       help="standard deviation of Q over Haar states versus n_q")
    p.add_argument("--nq-list", type=_int_list, required=True)
    p.add_argument("--trials", type=int, default=2000)
    p.set_defaults(func=cmd_concentration)

    p = sub.add_parser("circuit-gen", help="sample a circuit and write it as JSON")
    p.add_argument("--nq", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.set_defaults(func=cmd_circuit_gen)

    p = sub.add_parser("circuit-apply", help="apply a stored circuit to a basis state and print Q")
    p.add_argument("--circuit", required=True, help="circuit JSON file")
    p.add_argument("--basis", type=int, default=0)
    p.set_defaults(func=cmd_circuit_apply)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) is None:
        args.seed = secrets.randbits(63)
        print(f"seed={args.seed}", file=sys.stderr)
    try:
        args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}. Reduce --nq or use state-vector mode where "
              "the noise model allows it.", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, ParseError, ValueError, IndexError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
