"""Command-line surface for the percolation laboratory.

Estimator subcommands write CSV rows `variant,d,k,n,trials,seed,estimate,stderr`
(config embedded as a leading comment); exact computations print a readable
summary and can write a JSON report carrying the full config, the artifact
version, and every exact rational as a "num/den" string.  Exit codes: 0 on
success, 2 on validation errors, 3 when a resource budget guard trips.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import __version__
from .bounds import (
    bound_report,
    largedmon_check,
    bng_subcritical,
    bng_supercritical,
    one_dependent_criterion,
    smallest_percolating_k,
)
from .coupling import explore_coupled
from .dual import closed_edge_marginal, joint_dual_closed, path_closed_bound
from .errors import BudgetExceededError, KnpercError, ValidationError
from .explore import (
    BoxRegion,
    estimate_boundary_reach,
    estimate_proportion,
    explore,
    growth_trace,
    mass_transport_check,
)
from .lattice import ModelSpec, Variant
from .rng import derive_seed
from .saw import count_circuits, count_saw, peierls_bound
from .walks import enumerate_tau

CSV_HEADER = "variant,d,k,n,trials,seed,estimate,stderr"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class RunConfig:
    """Everything needed to reproduce one invocation byte for byte."""

    subcommand: str
    variant: Optional[str] = None
    d: Optional[int] = None
    k: Optional[int] = None
    n_values: Optional[List[int]] = None
    trials: Optional[int] = None
    master_seed: Optional[int] = None
    workers: int = 1
    extra: Optional[Dict] = None

    def as_dict(self) -> Dict:
        data = {key: value for key, value in asdict(self).items() if value is not None}
        data["version"] = __version__
        return data


def _write_csv(path: Optional[str], config: RunConfig, rows: Sequence[str]) -> None:
    lines = [f"# config: {json.dumps(config.as_dict(), sort_keys=True)}", CSV_HEADER]
    lines.extend(rows)
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_json(path: Optional[str], config: RunConfig, payload: Dict) -> None:
    document = {"config": config.as_dict(), **payload}
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_int_list(raw: str) -> List[int]:
    values: List[int] = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if ".." in chunk:
            lo, hi = chunk.split("..")
            values.extend(range(int(lo), int(hi) + 1))
        elif chunk:
            values.append(int(chunk))
    if not values:
        raise ValidationError(f"empty integer list {raw!r}")
    return values


def _add_model_args(p: argparse.ArgumentParser, variant: bool = True) -> None:
    if variant:
        p.add_argument("--variant", required=True, choices=[v.value for v in Variant])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knperc",
        description="Percolation laboratory for lattice k-neighbor graphs",
    )
    parser.add_argument("--version", action="version", version=f"knperc {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("estimate", help="boundary-reach probability over a grid of box sizes")
    _add_model_args(p)
    p.add_argument("--n", required=True, help="comma list or lo..hi of box half-sides")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("proportion", help="origin-component proportion over a grid of box sizes")
    _add_model_args(p)
    p.add_argument("--n", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("sample", help="export one explored cluster for rendering")
    _add_model_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("tau", help="exact coincidence-time distribution")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--cutoff", type=int, required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bounds", help="closed-form percolation criteria per dimension")
    p.add_argument("--d", required=True, help="comma list or lo..hi of dimensions (>= 4)")
    p.add_argument("--k", type=int, default=None, help="evaluate the verdict at this k")
    p.add_argument("--refined-cutoff", type=int, default=None,
                   help="exact coincidence head to this cutoff (d <= 6 defaults)")
    p.add_argument("--largedmon", type=int, default=None, metavar="D_MAX",
                   help="also emit the induction trace up to D_MAX")
    p.add_argument("--out", default=None)

    p = sub.add_parser("saw", help="self-avoiding walk counts")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("peierls", help="dual-circuit Peierls sum")
    p.add_argument("--closed-prob", required=True, help="rational like 1/4 or 0.25")
    p.add_argument("--growth", default="3", help="upper bound on the growth constant")
    p.add_argument("--n-start", type=int, default=4)
    p.add_argument("--n-exact", type=int, default=12)
    p.add_argument("--out", default=None)

    p = sub.add_parser("dual", help="exact dual-edge joint closure laws")
    _add_model_args(p)
    p.add_argument("--path-length", type=int, default=3)
    p.add_argument("--out", default=None)

    p = sub.add_parser("couple", help="coupled (k+1,d+1) -> (k,d) exploration")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("mass-transport", help="torus out/in component balance")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("growth", help="generation maxima trace for k >= d+1")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--generations", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    return parser


def _cmd_estimate(args, proportion: bool) -> None:
    spec = ModelSpec(args.d, args.k, args.variant)
    ns = _parse_int_list(args.n)
    config = RunConfig(
        subcommand="proportion" if proportion else "estimate",
        variant=spec.variant.value, d=args.d, k=args.k, n_values=ns,
        trials=args.trials, master_seed=args.seed, workers=args.workers,
    )
    rows = []
    fn = estimate_proportion if proportion else estimate_boundary_reach
    for n in ns:
        est = fn(spec, n, args.trials, args.seed, workers=args.workers)
        rows.append(
            f"{spec.variant.value},{args.d},{args.k},{n},{args.trials},{args.seed},"
            f"{_fmt(est.point)},{_fmt(est.stderr)}"
        )
    _write_csv(args.out, config, rows)


def _cmd_sample(args) -> None:
    spec = ModelSpec(args.d, args.k, args.variant)
    config = RunConfig("sample", variant=spec.variant.value, d=args.d, k=args.k,
                       n_values=[args.n], master_seed=args.seed)
    mode = "out" if spec.variant is Variant.DNG else "undirected"
    result = explore(spec, derive_seed(args.seed, 0), BoxRegion(args.n), mode,
                     stop_at_boundary=False, collect_sample=True)
    _write_json(args.out, config, {
        "box_n": args.n,
        "reached_boundary": result.reached_boundary,
        "visited_count": result.visited_count,
        "visited": [list(v) for v in result.visited_sample],
    })


def _cmd_tau(args) -> None:
    pmf = enumerate_tau(args.d, args.cutoff)
    config = RunConfig("tau", d=args.d, extra={"cutoff": args.cutoff})
    payload = {
        "d": args.d,
        "cutoff": args.cutoff,
        "pmf": {str(l): _frac(v) for l, v in enumerate(pmf.values)},
        "partial_sum": _frac(pmf.partial_sum()),
    }
    print(f"coincidence-time pmf, d={args.d} (exact):")
    for l, v in enumerate(pmf.values):
        print(f"  P(tau={l}) = {_frac(v)}")
    _write_json(args.out, config, payload)


def _cmd_bounds(args) -> None:
    dims = _parse_int_list(args.d)
    config = RunConfig("bounds", d=None, k=args.k,
                       extra={"dims": dims, "refined_cutoff": args.refined_cutoff})
    default_cutoffs = {4: 5, 5: 5, 6: 3}
    reports = []
    print(f"{'d':>3} {'U(d)':>10} {'smallest k':>10} {'refined':>10}")
    for d in dims:
        cutoff = args.refined_cutoff if args.refined_cutoff is not None else default_cutoffs.get(d)
        tau = enumerate_tau(d, cutoff) if cutoff else None
        k = args.k if args.k is not None else smallest_percolating_k(d)
        rep = bound_report(d, k, tau)
        reports.append({
            "d": d, "k": k,
            "cdub": rep.cdub_value,
            "refined": rep.refined_value,
            "threshold": rep.threshold,
            "verdict": rep.verdict,
            "smallest_k": smallest_percolating_k(d),
            "terms": rep.terms,
        })
        refined = f"{rep.refined_value:.6f}" if rep.refined_value is not None else "-"
        print(f"{d:>3} {rep.cdub_value:>10.6f} {smallest_percolating_k(d):>10} {refined:>10}")
    payload: Dict = {"reports": reports}
    if args.largedmon:
        trace = largedmon_check(args.largedmon)
        payload["largedmon"] = {
            "d_max": trace.d_max,
            "base_margins": trace.base_margins,
            "all_steps_ok": trace.all_steps_ok,
            "chain_negative_ok": trace.chain_negative_ok,
            "sqrt_ratio_constant": trace.sqrt_ratio_constant,
        }
    _write_json(args.out, config, payload)


def _cmd_saw(args) -> None:
    counts = count_saw(args.d, args.n_max)
    config = RunConfig("saw", d=args.d, extra={"n_max": args.n_max})
    print(f"c_n({args.d}) for n=1..{args.n_max}: {list(counts.counts)}")
    _write_json(args.out, config, {"d": args.d, "counts": list(counts.counts)})


def _cmd_peierls(args) -> None:
    closed = Fraction(args.closed_prob)
    growth = Fraction(args.growth)
    saw = count_saw(2, max(args.n_exact - 1, 1))
    report = peierls_bound(closed, saw, args.n_start, args.n_exact, growth)
    config = RunConfig("peierls", extra={
        "closed_prob": _frac(closed), "growth": _frac(growth),
        "n_start": args.n_start, "n_exact": args.n_exact,
    })
    print(f"Peierls bound: partial={float(report.partial_sum):.6f} "
          f"tail={float(report.tail_bound):.6f} total={float(report.total_bound):.6f}")
    print(f"wet-block threshold m*={report.wet_block_threshold} "
          f"(bound {float(report.wet_block_bound):.6f} < 1)")
    _write_json(args.out, config, {
        "terms": {str(n): _frac(t) for n, t in report.terms.items()},
        "partial_sum": _frac(report.partial_sum),
        "tail_bound": _frac(report.tail_bound),
        "total_bound": _frac(report.total_bound),
        "total_bound_float": float(report.total_bound),
        "wet_block_threshold": report.wet_block_threshold,
        "wet_block_bound": _frac(report.wet_block_bound),
    })


def _cmd_dual(args) -> None:
    spec = ModelSpec(args.d, args.k, args.variant)
    config = RunConfig("dual", variant=spec.variant.value, d=args.d, k=args.k,
                       extra={"path_length": args.path_length})
    geoms = {}
    for geometry in ("orthogonal-sharing-dual-vertex", "parallel-adjacent", "disjoint"):
        geoms[geometry] = joint_dual_closed(spec, geometry)
    marginal = closed_edge_marginal(spec)
    bound = path_closed_bound(spec, args.path_length)
    print(f"closed-edge marginal: {_frac(marginal)}")
    for geometry, value in geoms.items():
        print(f"  {geometry}: {_frac(value)}")
    print(f"max closed dual path, K={args.path_length}: {_frac(bound)} "
          f"(<= marginal^K = {_frac(marginal ** args.path_length)})")
    _write_json(args.out, config, {
        "closed_marginal": _frac(marginal),
        "joint_closed": {g: _frac(v) for g, v in geoms.items()},
        "path_length": args.path_length,
        "path_closed_max": _frac(bound),
    })


def _cmd_couple(args) -> None:
    config = RunConfig("couple", d=args.d, k=args.k, n_values=[args.n],
                       trials=args.trials, master_seed=args.seed)
    derived_hits = 0
    source_hits = 0
    certified = 0
    for t in range(args.trials):
        trial = explore_coupled(args.k, args.d, args.n, derive_seed(args.seed, t))
        derived_hits += trial.derived.reached_boundary
        source_hits += trial.source.reached_boundary
        if trial.derived.reached_boundary:
            if not trial.certificate_valid:
                raise KnpercError("containment certificate failed validation")
            certified += 1
    print(f"derived reach {derived_hits}/{args.trials}, source reach "
          f"{source_hits}/{args.trials}, certificates valid {certified}/{derived_hits}")
    _write_json(args.out, config, {
        "derived_reach": derived_hits,
        "source_reach": source_hits,
        "certificates_valid": certified,
        "trials": args.trials,
    })


def _cmd_mass_transport(args) -> None:
    spec = ModelSpec(args.d, args.k, Variant.DNG)
    report = mass_transport_check(spec, args.L, args.trials, args.seed)
    config = RunConfig("mass-transport", variant="dng", d=args.d, k=args.k,
                       trials=args.trials, master_seed=args.seed,
                       extra={"L": args.L})
    print(f"E|out| = {report.mean_out:.4f} +- {report.stderr_out:.4f}   "
          f"E|in| = {report.mean_in:.4f} +- {report.stderr_in:.4f}   "
          f"gap = {report.balanced_within:.2f} combined sigma")
    _write_json(args.out, config, {
        "mean_out": report.mean_out, "stderr_out": report.stderr_out,
        "mean_in": report.mean_in, "stderr_in": report.stderr_in,
        "gap_in_sigma": report.balanced_within,
    })


def _cmd_growth(args) -> None:
    spec = ModelSpec(args.d, args.k, Variant.DNG)
    trace = growth_trace(spec, args.generations, derive_seed(args.seed, 0))
    config = RunConfig("growth", variant="dng", d=args.d, k=args.k,
                       master_seed=args.seed, extra={"generations": args.generations})
    print(f"maxima strictly increasing: {trace.strictly_increasing}")
    _write_json(args.out, config, {
        "maxima": list(trace.maxima),
        "sizes": list(trace.sizes),
        "strictly_increasing": trace.strictly_increasing,
    })


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "estimate":
            _cmd_estimate(args, proportion=False)
        elif args.subcommand == "proportion":
            _cmd_estimate(args, proportion=True)
        elif args.subcommand == "sample":
            _cmd_sample(args)
        elif args.subcommand == "tau":
            _cmd_tau(args)
        elif args.subcommand == "bounds":
            _cmd_bounds(args)
        elif args.subcommand == "saw":
            _cmd_saw(args)
        elif args.subcommand == "peierls":
            _cmd_peierls(args)
        elif args.subcommand == "dual":
            _cmd_dual(args)
        elif args.subcommand == "couple":
            _cmd_couple(args)
        elif args.subcommand == "mass-transport":
            _cmd_mass_transport(args)
        elif args.subcommand == "growth":
            _cmd_growth(args)
        else:  # pragma: no cover - argparse enforces the choices
            raise ValidationError(f"unknown subcommand {args.subcommand}")
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError, ZeroDivisionError) as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
