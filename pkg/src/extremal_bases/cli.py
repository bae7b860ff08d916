"""Command line entry point: ``extremal-bases <subcommand> ...``.

Subcommands print JSON on stdout.  ``validate`` exits with status 0 only when
every check passes; the others exit 0 on success and 2 on bad input.
"""
import argparse
import json
import sys
from importlib import resources

import numpy as np

from . import __version__
from .bases import maximal_basis, minimal_basis, mixed_basis, tangency_residuals
from .counterexample import CounterexampleParams, lemma_equivalence_scan, run_counterexample
from .distances import SearchOptions, disc_distance, euclidean_distance
from .domains import load_domain, parse_point, vector_to_pairs
from .exceptions import DimensionError
from .harness import SuiteConfig, run_suite


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _inputs(args):
    domain = load_domain(args.domain)
    q = parse_point(args.point)
    if q.size != domain.n:
        raise DimensionError(f"point has dimension {q.size}, domain has {domain.n}")
    return domain, q


def cmd_distance(args):
    domain, q = _inputs(args)
    X = parse_point(args.direction)
    if X.size != domain.n:
        raise DimensionError(f"direction has dimension {X.size}, domain has {domain.n}")
    nrm = float(np.linalg.norm(X))
    if not nrm > 0:
        raise ValueError("direction must be nonzero")
    a = X / nrm
    opts = SearchOptions(seed=args.seed)
    d, phase = disc_distance(domain, q, a, with_phase=True)
    e, v = euclidean_distance(domain, q, opts)
    _emit({"point": vector_to_pairs(q), "direction": vector_to_pairs(a),
           "ray": domain.ray_distance(q, a), "disc": d, "disc_phase": phase,
           "euclidean": e, "nearest_direction": vector_to_pairs(v), "settings": opts.to_dict()})
    return 0


def _parse_kind(text):
    if text in ("minimal", "maximal"):
        return text, None
    if text.startswith("mixed:"):
        try:
            return "mixed", int(text.split(":", 1)[1])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"kind must be minimal, maximal or mixed:<k>, got {text!r}")


def cmd_basis(args):
    domain, q = _inputs(args)
    kind, k = args.kind
    opts = SearchOptions(seed=args.seed)
    if kind == "minimal":
        b = minimal_basis(domain, q, opts)
    elif kind == "maximal":
        b = maximal_basis(domain, q, opts)
    else:
        b = mixed_basis(domain, q, k, opts)
    out = b.to_dict()
    out["tangency_residuals"] = tangency_residuals(domain, b).tolist()
    _emit(out)
    return 0


def cmd_counterexample(args):
    params = CounterexampleParams(args.beta1, args.beta2, args.delta)
    report = run_counterexample(params, SearchOptions(seed=args.seed))
    if args.scan is not None:
        agree, bad, undecided = lemma_equivalence_scan(params, args.scan, seed=args.seed)
        report["scan"] = {"samples": args.scan, "agree": agree, "undecided": undecided,
                          "disagreements": bad}
    _emit(report)
    return 0


def cmd_validate(args):
    if args.config:
        cfg = SuiteConfig.load(args.config)
    else:
        text = resources.files(__package__).joinpath("configs/default.json").read_text()
        cfg = SuiteConfig.from_dict(json.loads(text))
    if args.seed is not None:
        cfg.seed = args.seed
    report = run_suite(cfg)
    if args.out:
        report.write(args.out)
    summary = {"passed": report.passed,
               "checks": [{k: c[k] for k in ("name", "samples", "max_ratio", "threshold",
                                             "verdict")} for c in report.checks],
               "runtime_seconds": report.environment["runtime_seconds"]}
    _emit(summary)
    return 0 if report.passed else 1


def build_parser():
    p = argparse.ArgumentParser(prog="extremal-bases", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("distance", help="ray, disc and Euclidean boundary distances")
    d.add_argument("--domain", required=True, help="domain JSON file")
    d.add_argument("--point", required=True, help="comma-separated complex coordinates")
    d.add_argument("--direction", required=True, help="comma-separated complex direction")
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_distance)

    b = sub.add_parser("basis", help="minimal, maximal or mixed extremal basis")
    b.add_argument("--domain", required=True, help="domain JSON file")
    b.add_argument("--point", required=True, help="comma-separated complex coordinates")
    b.add_argument("--kind", required=True, type=_parse_kind,
                   help="minimal, maximal or mixed:<k>")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_basis)

    c = sub.add_parser("counterexample", help="maximal bases without property (*)")
    defaults = CounterexampleParams()
    c.add_argument("--beta1", type=float, default=defaults.beta1)
    c.add_argument("--beta2", type=float, default=defaults.beta2)
    c.add_argument("--delta", type=float, default=defaults.delta)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--scan", type=int, metavar="K", help="also compare the two T tests on K samples")
    c.set_defaults(func=cmd_counterexample)

    v = sub.add_parser("validate", help="randomized validation suites")
    v.add_argument("--config", help="SuiteConfig JSON file (default: shipped config)")
    v.add_argument("--out", help="directory for report.json and samples.csv")
    v.add_argument("--seed", type=int, help="override the config seed")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
