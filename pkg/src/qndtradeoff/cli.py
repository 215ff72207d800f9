"""Command-line front end: sweeps, bound tables, single simulations, verification.

Commands
--------
sweep-alpha    trade-off curve versus measurement strength for one dimension
sweep-overlap  qubit fidelities versus pointer overlap O (min-error and
               unambiguous readout, analytic and Monte Carlo columns)
bound          tabulate the fidelity trade-off boundary F(G)
simulate       one protocol, one Monte Carlo estimate
verify         run the deterministic invariant suite, JSON report

All stochastic commands require a seed, either via --seed or the
QNDTRADEOFF_SEED environment variable (the flag wins).  Identical
(command line, seed) pairs produce byte-identical output.  CSV cells
carry 12 significant digits; JSON carries full double precision with
non-finite values rendered as null.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import verify as verify_mod
from .channel import make_ancilla, qubit_pointer_spec
from .discrimination import (
    INCONCLUSIVE,
    Povm,
    error_rate,
    helstrom_povm,
    unambiguous_povm,
)
from .states import PureState
from .tradeoff import (
    SubensembleStats,
    analytic_fg,
    bound_rhs,
    imperfect_protocol,
    mc_fg,
    perfect_protocol,
    qubit_minerror_point,
)

SEED_ENV = "QNDTRADEOFF_SEED"
DEFAULT_VERIFY_SEED = 123456789

_MIN_SAMPLES = 1000


class UsageError(Exception):
    pass


def _parse_grid(text: str) -> np.ndarray:
    """Parse 'start:stop:steps' into an inclusive uniform grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:steps, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("grid needs at least one step")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise argparse.ArgumentTypeError("grid endpoints must be finite")
    return np.linspace(a, b, n)


def _parse_seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None


def _resolve_seed(args, default: int | None = None) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if default is not None:
        return default
    raise UsageError(f"a seed is required: pass --seed or set {SEED_ENV}")


def _check_samples(n: int) -> int:
    if n < _MIN_SAMPLES:
        raise UsageError(f"--samples must be at least {_MIN_SAMPLES}")
    return n


def _check_unit_grid(grid: np.ndarray, what: str) -> np.ndarray:
    if grid.min() < 0.0 or grid.max() > 1.0:
        raise UsageError(f"{what} grid must stay within [0, 1]")
    return grid


def _fmt_cell(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _render_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt_cell(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _render_json_table(command: str, columns, rows) -> str:
    body = {
        "command": command,
        "columns": list(columns),
        "rows": [{c: _json_safe(x) for c, x in zip(columns, row)} for row in rows],
    }
    return json.dumps(body, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _emit_table(args, command: str, columns, rows) -> None:
    if args.format == "csv":
        _emit(_render_csv(columns, rows), args.out)
    else:
        _emit(_render_json_table(command, columns, rows), args.out)


# ---------------------------------------------------------------------------
# commands

ALPHA_COLUMNS = (
    "alpha",
    "beta",
    "F_analytic",
    "G_analytic",
    "F_mc",
    "G_mc",
    "se_F",
    "se_G",
    "F_bound_at_G",
    "saturation_gap",
)

OVERLAP_COLUMNS = (
    "O",
    "F_minerror",
    "G_minerror",
    "F_mc",
    "G_mc",
    "P_e",
    "P_I",
    "G_C_mc",
    "F_C_mc",
    "saturation_gap",
)

BOUND_COLUMNS = ("G", "F_bound")


def cmd_sweep_alpha(args) -> int:
    if args.d < 2:
        raise UsageError("--d must be at least 2")
    grid = _check_unit_grid(args.alpha_grid, "alpha")
    n = _check_samples(args.samples)
    seed = _resolve_seed(args)
    rows = []
    for i, alpha in enumerate(grid):
        alpha = float(alpha)
        prep = make_ancilla(args.d, alpha)
        exact = analytic_fg(args.d, alpha)
        point = mc_fg(perfect_protocol(args.d, alpha, twirl=args.twirl), n, seed, stream_id=i)
        f_bound = bound_rhs(exact.G, args.d)
        rows.append(
            (
                alpha,
                prep.beta,
                exact.F,
                exact.G,
                point.F,
                point.G,
                point.se_F,
                point.se_G,
                f_bound,
                f_bound - exact.F,
            )
        )
    _emit_table(args, "sweep-alpha", ALPHA_COLUMNS, rows)
    return 0


def cmd_sweep_overlap(args) -> int:
    if args.d != 2:
        raise UsageError("sweep-overlap supports qubit pointers only (--d 2)")
    grid = _check_unit_grid(args.overlap_grid, "overlap")
    n = _check_samples(args.samples)
    seed = _resolve_seed(args)
    rows = []
    for i, big_o in enumerate(grid):
        big_o = float(big_o)
        o = math.sqrt(big_o)
        exact = qubit_minerror_point(o)
        spec = qubit_pointer_spec(o)
        mu1 = PureState(2, spec.pointer_states[:, 0])
        mu2 = PureState(2, spec.pointer_states[:, 1])
        p_e = error_rate(helstrom_povm(mu1, mu2), (mu1, mu2))
        point = mc_fg(
            imperfect_protocol(spec, strategy="minerror", twirl=args.twirl),
            n,
            seed,
            stream_id=2 * i,
        )
        if o >= 1.0 - 1e-12:
            # identical pointers: no unambiguous POVM exists, always inconclusive
            p_i, f_c, g_c = 1.0, math.nan, math.nan
        else:
            pov = unambiguous_povm(mu1, mu2)
            sigma0 = pov.element_for(INCONCLUSIVE)
            p_i = float(
                np.mean(
                    [
                        (m.amplitudes.conj() @ sigma0 @ m.amplitudes).real
                        for m in (mu1, mu2)
                    ]
                )
            )
            stats = mc_fg(
                imperfect_protocol(spec, strategy="unambiguous", twirl=args.twirl),
                n,
                seed,
                stream_id=2 * i + 1,
            )
            f_c, g_c = stats.F_C, stats.G_C
        rows.append(
            (
                big_o,
                exact.F,
                exact.G,
                point.F,
                point.G,
                p_e,
                p_i,
                g_c,
                f_c,
                bound_rhs(exact.G, 2) - exact.F,
            )
        )
    _emit_table(args, "sweep-overlap", OVERLAP_COLUMNS, rows)
    return 0


def cmd_bound(args) -> int:
    if args.d < 2:
        raise UsageError("--d must be at least 2")
    d = args.d
    if args.g_grid is None:
        grid = np.linspace(1.0 / d, 2.0 / (d + 1), 21)
    else:
        grid = args.g_grid
        if grid.min() < 1.0 / (d + 1) - 1e-12 or grid.max() > 2.0 / (d + 1) + 1e-12:
            raise UsageError(f"G grid must stay within [1/(d+1), 2/(d+1)] for d={d}")
    rows = [(float(g), bound_rhs(float(g), d)) for g in grid]
    _emit_table(args, "bound", BOUND_COLUMNS, rows)
    return 0


def _load_povm(path: str, dim: int) -> Povm:
    """Load a custom POVM from JSON: elements as nested [re, im] pairs."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read POVM file {path!r}: {exc}") from None
    if not isinstance(data, dict) or "elements" not in data:
        raise UsageError("POVM file must be a JSON object with an 'elements' key")
    try:
        raw = np.asarray(data["elements"], dtype=float)
        elements = tuple(raw[..., 0] + 1j * raw[..., 1])
    except (ValueError, IndexError) as exc:
        raise UsageError(f"malformed POVM elements: {exc}") from None
    labels = data.get("labels")
    if labels is None:
        labels = tuple(range(len(elements)))
    else:
        labels = tuple(
            lab if lab == INCONCLUSIVE else int(lab) for lab in labels
        )
    try:
        return Povm(dim=dim, elements=elements, labels=labels)
    except ValueError as exc:
        raise UsageError(f"invalid POVM: {exc}") from None


def cmd_simulate(args) -> int:
    n = _check_samples(args.samples)
    seed = _resolve_seed(args)
    if (args.alpha is None) == (args.overlap is None):
        raise UsageError("pass exactly one of --alpha (ideal coupling) or --overlap")
    if args.alpha is not None:
        if not 0.0 <= args.alpha <= 1.0:
            raise UsageError("--alpha must lie in [0, 1]")
        if args.strategy not in (None, "projective"):
            raise UsageError("ideal coupling uses the projective readout; drop --strategy")
        protocol = perfect_protocol(args.d, args.alpha, twirl=args.twirl)
        exact = analytic_fg(args.d, args.alpha)
        header = {"mode": "ideal", "d": args.d, "alpha": args.alpha}
    else:
        if args.d != 2:
            raise UsageError("imperfect pointer simulation supports --d 2 only")
        if not 0.0 <= args.overlap <= 1.0:
            raise UsageError("--overlap must lie in [0, 1]")
        o = math.sqrt(args.overlap)
        spec = qubit_pointer_spec(o)
        strategy = args.strategy or "minerror"
        povm = None
        if strategy == "custom":
            if args.povm_file is None:
                raise UsageError("--strategy custom requires --povm-file")
            povm = _load_povm(args.povm_file, spec.dim)
        elif args.povm_file is not None:
            raise UsageError("--povm-file only applies with --strategy custom")
        protocol = imperfect_protocol(
            spec,
            strategy=strategy,
            povm=povm,
            twirl=args.twirl,
            phase_fix=args.phase_fix,
        )
        exact = qubit_minerror_point(o) if strategy == "minerror" else None
        header = {"mode": "imperfect", "d": 2, "overlap": args.overlap, "strategy": strategy}
    result = mc_fg(protocol, n, seed, stream_id=0)
    body = dict(header)
    body.update(
        {
            "twirl": protocol.twirl,
            "phase_fix": protocol.phase_fix,
            "n_samples": n,
            "seed": seed,
        }
    )
    if isinstance(result, SubensembleStats):
        body.update(
            {
                "conclusive_fraction": result.conclusive_fraction,
                "se_fraction": result.se_fraction,
                "F_C": result.F_C,
                "G_C": result.G_C,
                "se_F_C": result.se_F_C,
                "se_G_C": result.se_G_C,
                "n_conclusive": result.n_conclusive,
                "misidentified": result.misidentified,
                "F_unconditional": result.unconditional_F,
                "se_F_unconditional": result.se_unconditional_F,
            }
        )
    else:
        body.update(
            {"F_mc": result.F, "G_mc": result.G, "se_F": result.se_F, "se_G": result.se_G}
        )
    if exact is not None:
        body.update({"F_analytic": exact.F, "G_analytic": exact.G})
    if args.format == "csv":
        columns = tuple(body)
        _emit(_render_csv(columns, [tuple(body[c] for c in columns)]), args.out)
    else:
        _emit(
            json.dumps({k: _json_safe(v) for k, v in body.items()}, indent=2) + "\n",
            args.out,
        )
    return 0


def cmd_verify(args) -> int:
    seed = _resolve_seed(args, default=DEFAULT_VERIFY_SEED)
    results = verify_mod.run_all(seed)
    _emit(verify_mod.render_report(results, seed), args.out)
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# parser


def _add_common(sp, *, samples_default=10_000):
    sp.add_argument("--samples", type=int, default=samples_default, help="Monte Carlo sample count")
    sp.add_argument("--seed", type=_parse_seed, default=None, help=f"master seed (default: ${SEED_ENV})")
    sp.add_argument("--twirl", action=argparse.BooleanOptionalAction, default=True, help="randomize the input basis per run")
    sp.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    sp.add_argument("--out", default=None, metavar="PATH", help="write output to PATH instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qndtradeoff",
        description="Simulate QND measurement of d-level systems and the trade-off "
        "between estimation fidelity G and output fidelity F.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep-alpha", help="trade-off curve versus measurement strength")
    sp.add_argument("--d", type=int, default=2, help="system dimension")
    sp.add_argument("--alpha-grid", type=_parse_grid, default="0:1:21", metavar="a:b:n")
    _add_common(sp)
    sp.set_defaults(handler=cmd_sweep_alpha)

    sp = sub.add_parser("sweep-overlap", help="qubit fidelities versus pointer overlap O")
    sp.add_argument("--d", type=int, default=2, help="system dimension (must be 2)")
    sp.add_argument("--overlap-grid", type=_parse_grid, default="0:1:11", metavar="a:b:n")
    _add_common(sp)
    sp.set_defaults(handler=cmd_sweep_overlap)

    sp = sub.add_parser("bound", help="tabulate the boundary F(G)")
    sp.add_argument("--d", type=int, default=2, help="system dimension")
    sp.add_argument("--g-grid", type=_parse_grid, default=None, metavar="a:b:n")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", default=None, metavar="PATH")
    sp.set_defaults(handler=cmd_bound)

    sp = sub.add_parser("simulate", help="Monte Carlo estimate for one protocol")
    sp.add_argument("--d", type=int, default=2, help="system dimension")
    sp.add_argument("--alpha", type=float, default=None, help="ideal coupling strength in [0, 1]")
    sp.add_argument("--overlap", type=float, default=None, help="pointer overlap O in [0, 1] (qubit)")
    sp.add_argument(
        "--strategy",
        choices=("projective", "minerror", "unambiguous", "custom"),
        default=None,
        help="readout strategy for imperfect pointers",
    )
    sp.add_argument("--povm-file", default=None, metavar="JSON", help="custom POVM (nested [re, im] pairs)")
    sp.add_argument("--phase-fix", action=argparse.BooleanOptionalAction, default=None, help="undo the pointer overlap phase before output")
    _add_common(sp, samples_default=10_000)
    sp.set_defaults(handler=cmd_simulate)

    sp = sub.add_parser("verify", help="run the invariant suite, emit a JSON report")
    sp.add_argument("--seed", type=_parse_seed, default=None)
    sp.add_argument("--out", default=None, metavar="PATH")
    sp.set_defaults(handler=cmd_verify)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
