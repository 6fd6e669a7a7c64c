"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 enumeration cap exceeded,
4 falsified inequality.  Every command writing ``--out FILE`` also writes
``FILE.manifest.json``; commands printing to stdout put the manifest on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .audit import run_audit
from .core import Multigraph, StepGraphon, StepKernel, TargetGraph, TestGraph, encode_target_multigraph, encode_test_multigraph
from .density import DEFAULT_CAP, DensityReport, t_density, t_graphon, t_inj_density, t_monte_carlo
from ._validation import check_random_state
from .errors import CapExceededError, ValidationError
from .io import dumps, file_sha256, load, load_battery, to_document, write_text
from .multigraph import diagnose_convergence, first_differing_order, moment_matched_pair
from .norms import cut_norm, jumble_norm, lp_norm
from .regularity import weak_regularity_partition
from .sampling import randomize_multiplicities, run_convergence_experiment, sample_w_random

EXIT_USAGE, EXIT_CAP, EXIT_FALSIFIED = 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--cap", type=float, default=DEFAULT_CAP, help="enumeration cap on n**k (default 1e8)")
    p.add_argument("--threads", type=int, default=1, help="accepted for reproducibility records; runs single-threaded")
    p.add_argument("--out", help="output file (default stdout)")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="graphlimits", description="Decorated graph limits toolkit")
    parser.add_argument("--version", action="version", version=f"graphlimits {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("density", parents=[common], help="homomorphism density of a test graph in a target")
    p.add_argument("--test", required=True, help="test graph or multigraph JSON")
    p.add_argument("--target", required=True, help="target graph, multigraph or step graphon JSON")
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--injective", action="store_true", help="injective density (exact mode)")
    p.add_argument("--method", choices=["contract", "enumerate"], default="contract")

    p = sub.add_parser("norm", parents=[common], help="L^p, cut or jumble norm of a step kernel")
    p.add_argument("--kernel", required=True)
    p.add_argument("--which", choices=["lp", "cut", "jumble"], required=True)
    p.add_argument("--p", type=float, default=2.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="search", action="store_const", const="exact")
    g.add_argument("--heuristic", dest="search", action="store_const", const="heuristic")
    p.set_defaults(search="auto")

    p = sub.add_parser("regularize", parents=[common], help="weak regularity partition of a step kernel")
    p.add_argument("--kernel", required=True)
    p.add_argument("--classes", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="search", action="store_const", const="exact")
    g.add_argument("--heuristic", dest="search", action="store_const", const="heuristic")
    p.set_defaults(search="exact")

    p = sub.add_parser("sample", parents=[common], help="sample a W-random graph")
    p.add_argument("--graphon", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--randomize", action="store_true", help="draw multiplicities and output a multigraph")

    p = sub.add_parser("experiment", parents=[common], help="convergence experiment, CSV output")
    p.add_argument("--graphon", required=True)
    p.add_argument("--battery", required=True)
    p.add_argument("--ns", required=True, help="comma-separated sizes")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--kind", choices=["hom", "inj"], default="hom")
    p.add_argument("--randomize", action="store_true")

    p = sub.add_parser("diagnose", parents=[common], help="node vs node-and-edge convergence diagnosis")
    p.add_argument("--sequence", required=True, help="directory of multigraph JSON files (sorted by name)")
    p.add_argument("--battery", required=True)
    p.add_argument("--tmax", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("twins", parents=[common], help="two distributions with matching low moments")
    p.add_argument("--support", type=int, required=True, help="support {0..M}")
    p.add_argument("--order", type=int, required=True, help="highest matched moment P")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eps-scale", type=float, default=0.75, help="fraction of the largest feasible perturbation")
    g.add_argument("--eps", type=float, help="absolute perturbation size")

    p = sub.add_parser("audit", parents=[common], help="randomized inequality audit")
    p.add_argument("--runs", type=int, default=100)
    return parser


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _pair_objects(test, target):
    if isinstance(test, Multigraph):
        P = test.max_multiplicity()
        test = encode_test_multigraph(test, P)
        if isinstance(target, Multigraph):
            target = encode_target_multigraph(target, P)
    elif isinstance(target, Multigraph):
        target = encode_target_multigraph(target, test.space.dim - 1)
    if not isinstance(test, TestGraph):
        raise ValidationError("--test must be a test graph or multigraph")
    if not isinstance(target, (TargetGraph, StepGraphon)):
        raise ValidationError("--target must be a target graph, multigraph or step graphon")
    return test, target


def cmd_density(args):
    F, G = _pair_objects(load(args.test), load(args.target))
    if args.mode == "mc":
        return t_monte_carlo(F, G, args.samples, args.seed).to_dict()
    if isinstance(G, StepGraphon):
        if args.injective:
            raise ValidationError("--injective needs a finite target graph")
        value = t_graphon(F, G, args.cap, args.method)
    elif args.injective:
        value = t_inj_density(F, G, args.cap)
    else:
        value = t_density(F, G, args.cap, args.method)
    return DensityReport(value, "exact", 0, 0.0).to_dict()


def _kernel(path):
    u = load(path)
    if not isinstance(u, (StepKernel, StepGraphon)):
        raise ValidationError("--kernel must be a step kernel or step graphon JSON")
    return u


def cmd_norm(args):
    u = _kernel(args.kernel)
    if args.which == "lp":
        return {"value": lp_norm(u, args.p), "witness_sets": None, "method": "exact", "p": args.p}
    fn = cut_norm if args.which == "cut" else jumble_norm
    return fn(u, args.search, args.seed).to_dict()


def cmd_regularize(args):
    u = _kernel(args.kernel)
    if not isinstance(u, StepKernel):
        raise ValidationError("regularize expects a step kernel")
    res = weak_regularity_partition(u, args.classes, args.search, args.seed)
    return res.to_dict()


def cmd_sample(args):
    W = load(args.graphon)
    if not isinstance(W, StepGraphon):
        raise ValidationError("--graphon must be a step graphon JSON")
    rng = check_random_state(args.seed)
    G = sample_w_random(args.n, W, rng)
    if args.randomize:
        return to_document(randomize_multiplicities(G, rng))
    return to_document(G)


def cmd_experiment(args):
    W = load(args.graphon)
    if not isinstance(W, StepGraphon):
        raise ValidationError("--graphon must be a step graphon JSON")
    battery = load_battery(args.battery)
    try:
        ns = [int(x) for x in args.ns.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"--ns: {exc}") from exc
    table = run_convergence_experiment(W, battery, ns, args.trials, args.seed, args.kind, args.randomize, args.cap)
    return table.to_csv()


def cmd_diagnose(args):
    folder = Path(args.sequence)
    if not folder.is_dir():
        raise ValidationError(f"--sequence: {folder} is not a directory")
    files = sorted(folder.glob("*.json"))
    if not files:
        raise ValidationError(f"--sequence: no JSON files in {folder}")
    seq = [load(f, "multigraph") for f in files]
    battery = [g for _, g in load_battery(args.battery)]
    if not all(isinstance(F, Multigraph) for F in battery):
        raise ValidationError("diagnose needs a battery of multigraphs")
    d = diagnose_convergence(seq, battery, args.tmax, args.eps, cap=args.cap)
    doc = d.to_dict()
    doc["sequence"] = [f.name for f in files]
    return doc


def cmd_twins(args):
    sigma, tau = moment_matched_pair(args.support, args.order, args.eps, eps_scale=args.eps_scale)
    return {
        "sigma": sigma.to_dict(),
        "tau": tau.to_dict(),
        "matched_order": args.order,
        "first_differing_order": first_differing_order(sigma, tau),
    }


def cmd_audit(args):
    report = run_audit(args.runs, args.seed)
    return report.to_dict()


COMMANDS = {
    "density": cmd_density,
    "norm": cmd_norm,
    "regularize": cmd_regularize,
    "sample": cmd_sample,
    "experiment": cmd_experiment,
    "diagnose": cmd_diagnose,
    "twins": cmd_twins,
    "audit": cmd_audit,
}

_INPUT_FLAGS = ("test", "target", "kernel", "graphon", "battery")


def _manifest(argv, args, started):
    inputs = {}
    for name in _INPUT_FLAGS:
        path = getattr(args, name, None)
        if path:
            inputs[path] = file_sha256(path)
    seq = getattr(args, "sequence", None)
    if seq:
        for f in sorted(Path(seq).glob("*.json")):
            inputs[str(f)] = file_sha256(f)
    return {
        "command": ["graphlimits", *argv],
        "inputs": inputs,
        "seed": args.seed,
        "cap": args.cap,
        "threads": args.threads,
        "version": __version__,
        "wall_time_s": time.perf_counter() - started,
    }


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        result = COMMANDS[args.command](args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = result if isinstance(result, str) else dumps(result)
    manifest = _manifest(argv, args, started)
    if args.out:
        write_text(args.out, text)
        write_text(args.out + ".manifest.json", dumps(manifest))
    else:
        sys.stdout.write(text)
        sys.stderr.write(json.dumps(manifest, sort_keys=True) + "\n")
    if args.command == "audit" and not result["ok"]:
        print(f"error: {result['falsifications']} falsified inequalities", file=sys.stderr)
        return EXIT_FALSIFIED
    return 0


if __name__ == "__main__":
    sys.exit(main())
