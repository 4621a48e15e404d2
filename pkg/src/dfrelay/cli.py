"""Command line front end: solve, oracle-compare, train-codebook and sweep.

Exit codes: 0 success, 1 usage error, 2 runtime or convergence-budget error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .channel import GainSet, Geometry, draw_gains, snr_db_to_budget
from .errors import OracleLimitError, ParameterError
from .model import PowerBudget, Scheme, SolverOptions

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text: str) -> tuple:
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; '#' starts a comment; keys may use dashes or underscores."""
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep or not key.strip():
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return out


def _common(p: argparse.ArgumentParser, *, multi: bool = False):
    p.add_argument("--config", help="flat key = value file; command-line flags take precedence")
    p.add_argument("--scheme", type=_names if multi else str, default=None,
                   help="selective | enhanced | individual" + (" (comma list; baselines allowed)" if multi else ""))
    p.add_argument("--n", type=int, default=None, help="number of subcarriers")
    p.add_argument("--d", type=float, default=None, help="normalized source-relay distance in (0, 1)")
    p.add_argument("--snr-db", type=_floats if multi else float, default=None,
                   help="SNR in dB (P_t / (N sigma_d^2))" + (", comma list" if multi else ""))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget-mode", choices=("sum", "individual"), default=None)
    p.add_argument("--source-fraction", type=float, default=None, help="P_S / P_t for individual budgets")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dfrelay", description="Power allocation and subcarrier pairing for OFDM DF relaying.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("solve", help="solve one instance and print the allocation as JSON")
    _common(p)
    p.add_argument("--gains", help="JSON file with lam_sd, lam_sr, lam_rd lists (otherwise drawn from --seed)")
    p.add_argument("--out", help="write the JSON here instead of stdout")

    p = sub.add_parser("oracle-compare", help="duality-gap report against exhaustive search")
    _common(p)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--out")

    p = sub.add_parser("train-codebook", help="train a limited-feedback codebook and write it to a file")
    _common(p)
    p.add_argument("--bits", type=int, default=None)
    p.add_argument("--training-size", type=int, default=None)
    p.add_argument("--lloyd-eps", type=float, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep and write CSV")
    _common(p, multi=True)
    p.add_argument("--kind", choices=("snr", "subcarriers", "location", "feedback_bits", "gapstats"), default=None)
    p.add_argument("--n-grid", type=_ints, default=None)
    p.add_argument("--d-grid", type=_floats, default=None)
    p.add_argument("--bits", type=_ints, default=None)
    p.add_argument("--feedback-scheme", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--training-size", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)
    return parser


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    for key, raw in read_config(args.config).items():
        if key in ("config", "help") or key not in actions:
            raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
        if getattr(args, key) is not None:
            continue
        act = actions[key]
        try:
            val = act.type(raw) if act.type else raw
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"{args.config}: bad value for {key}: {exc}") from None
        if act.choices is not None and val not in act.choices:
            raise UsageError(f"{args.config}: {key} must be one of {list(act.choices)}")
        setattr(args, key, val)


def _get(args, name, default):
    v = getattr(args, name, None)
    return default if v is None else v


def _budget(args, n: int, snr_db: float) -> PowerBudget:
    total = snr_db_to_budget(snr_db, n)
    if _get(args, "budget_mode", "sum") == "individual":
        return PowerBudget.split(total, _get(args, "source_fraction", 0.75))
    return PowerBudget(total=total)


def _options(args) -> SolverOptions:
    return SolverOptions(max_iter=_get(args, "max_iter", 2000), eps=_get(args, "eps", 1e-4))


def _write(text: str, out) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _load_gains(path) -> GainSet:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return GainSet.from_lists(data["lam_sd"], data["lam_sr"], data["lam_rd"])
    except KeyError as exc:
        raise ParameterError(f"{path}: missing field {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: invalid JSON: {exc}") from None


def _scheme_for(args, default="enhanced") -> Scheme:
    scheme = Scheme.parse(_get(args, "scheme", default))
    if scheme is Scheme.ENHANCED_INDIVIDUAL and _get(args, "budget_mode", "sum") != "individual":
        args.budget_mode = "individual"
    return scheme


def cmd_solve(args) -> int:
    from .rates import recompute_rate
    from .solvers import solve
    scheme = _scheme_for(args)
    opts = _options(args)
    if args.gains:
        h = _load_gains(args.gains)
    else:
        h = draw_gains(_get(args, "n", 4), Geometry(d=_get(args, "d", 0.5)), _get(args, "seed", 0))
    budget = _budget(args, h.n, _get(args, "snr_db", 10.0))
    alloc = solve(h, budget, scheme, opts)
    recompute_rate(alloc, h)
    doc = alloc.to_dict()
    doc["budget"] = {"total": budget.total, "source": budget.source, "relay": budget.relay}
    _write(json.dumps(doc, indent=2) + "\n", args.out)
    if not alloc.converged:
        print("dfrelay: solver did not converge within the iteration budget", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_oracle_compare(args) -> int:
    from .harness import trial_seed
    from .oracle import exhaustive_solve
    from .solvers import solve
    scheme = _scheme_for(args, "selective")
    n = _get(args, "n", 2)
    trials = _get(args, "trials", 100)
    if trials < 1:
        raise UsageError("--trials must be >= 1")
    seed = _get(args, "seed", 0)
    geom = Geometry(d=_get(args, "d", 0.5))
    budget = _budget(args, n, _get(args, "snr_db", 10.0))
    opts = _options(args)
    rel_gaps, misses, violations = [], 0, 0
    for t in range(trials):
        h = draw_gains(n, geom, trial_seed(seed, 0, 0, t))
        alloc = solve(h, budget, scheme, opts)
        orc = exhaustive_solve(h, budget, scheme)
        best = orc.best_rate
        rel_gaps.append((alloc.dual_value - best) / best if best > 0 else 0.0)
        misses += alloc.sum_rate < best - 1e-3 * max(best, 1e-12)
        violations += alloc.sum_rate > alloc.dual_value + 1e-6
    g = np.asarray(rel_gaps)
    report = {
        "scheme": scheme.value, "n": n, "trials": trials, "seed": seed, "budget_total": budget.total,
        "frac_rel_gap_gt_1pct": float(np.mean(g > 0.01)), "mean_rel_gap": float(np.mean(g)),
        "max_rel_gap": float(np.max(g)), "frac_solver_below_oracle": misses / trials,
        "weak_duality_violations": int(violations),
    }
    _write(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_RUNTIME if violations else EXIT_OK


def cmd_train_codebook(args) -> int:
    from .codebook import build_training_set, train_codebook, write_codebook
    from .harness import trial_seed
    if not args.out:
        raise UsageError("train-codebook needs --out")
    scheme = _scheme_for(args)
    n = _get(args, "n", 4)
    bits = _get(args, "bits", 2)
    seed = _get(args, "seed", 0)
    m = _get(args, "training_size", 10_000)
    geom = Geometry(d=_get(args, "d", 0.5))
    budget = _budget(args, n, _get(args, "snr_db", 10.0))
    if m < 16 * 2 ** bits:
        raise UsageError(f"--training-size must be >= {16 * 2 ** bits} for {bits} bits")
    channels = [draw_gains(n, geom, trial_seed(seed, 1, 0, i)) for i in range(m)]
    solve_budget = budget if scheme is Scheme.ENHANCED_INDIVIDUAL else PowerBudget(total=budget.total)
    H = build_training_set(channels, solve_budget, scheme, _options(args))
    C = train_codebook(H, bits, _get(args, "lloyd_eps", 1e-6), seed=seed, scheme=scheme, budget=solve_budget)
    write_codebook(C, args.out)
    print(json.dumps({"out": args.out, "bits": bits, "training_size": m,
                      "distortion": C.train_meta["distortion"], "iterations": C.train_meta["iterations"]}))
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .harness import ExperimentConfig, emit_csv, run_sweep
    fields = {
        "kind": "kind", "scheme": "schemes", "n": "n", "d": "d", "snr_db": "snr_db", "n_grid": "n_grid",
        "d_grid": "d_grid", "bits": "bits", "feedback_scheme": "feedback_scheme", "trials": "trials",
        "seed": "seed", "budget_mode": "budget_mode", "source_fraction": "source_fraction",
        "training_size": "training_size", "max_iter": "max_iter", "eps": "eps", "workers": "workers",
    }
    kw = {dst: getattr(args, src) for src, dst in fields.items() if getattr(args, src, None) is not None}
    if kw.get("kind") == "individual":
        kw["budget_mode"] = "individual"
    try:
        cfg = ExperimentConfig(**kw)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    points = run_sweep(cfg)
    emit_csv(points, args.out or sys.stdout, cfg)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "oracle-compare": cmd_oracle_compare,
            "train-codebook": cmd_train_codebook, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config(parser, args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
