"""Monte Carlo sweeps over SNR, subcarrier count, relay location and feedback bits, plus CSV output.

Every channel draw comes from ``SeedSequence(entropy=seed, spawn_key=(stream, grid, trial))``:
stream 0 feeds evaluation trials and stream 1 feeds codebook training, so the two never overlap
and each trial's channel is a pure function of its indices.  With ``common_draws`` (default) the
grid key is 0 everywhere, so trial t sees the same underlying fading at every grid point and
curve shapes are not masked by independent Monte Carlo noise.
"""
from __future__ import annotations

import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .baselines import BASELINES
from .channel import GainSet, Geometry, draw_gains, snr_db_to_budget
from .codebook import Codebook, build_training_set, codebook_rates, train_codebook
from .errors import ParameterError
from .model import PowerBudget, Scheme, SolverOptions
from .oracle import exhaustive_solve
from .rates import recompute_rate
from .solvers import solve

KINDS = ("snr", "subcarriers", "location", "feedback_bits", "gapstats")
SOLVER_SERIES = tuple(s.value for s in Scheme)
DEFAULT_N_GRID = (2, 4, 8, 16)
DEFAULT_D_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))
DEFAULT_BITS = (0, 1, 2, 3, 4)
DEFAULT_SNR_GRID = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
SNR_DEFINITION = "snr_db = 10*log10(P_t / (N * sigma_d^2)); sigma_r^2 = sigma_d^2 = 1"
EVAL_STREAM, TRAIN_STREAM = 0, 1
GAP_THRESHOLD = 0.01


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "snr"
    schemes: tuple = ("enhanced", "selective", "opa_no_sp", "upa_no_sp")
    n: int = 4
    d: float = 0.5
    snr_db: tuple = DEFAULT_SNR_GRID
    n_grid: tuple = DEFAULT_N_GRID
    d_grid: tuple = DEFAULT_D_GRID
    bits: tuple = ()
    feedback_scheme: str = "enhanced"
    trials: int = 500
    seed: int = 0
    budget_mode: str = "sum"
    source_fraction: float = 0.75
    training_size: int = 10_000
    lloyd_eps: float = 1e-6
    max_iter: int = 2000
    eps: float = 1e-4
    path_loss_exp: float = 2.5
    workers: int = 1
    common_draws: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"kind must be one of {KINDS}, got {self.kind!r}")
        for name in ("schemes", "snr_db", "n_grid", "d_grid", "bits"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for s in self.schemes:
            if s not in SOLVER_SERIES and s not in BASELINES:
                raise ParameterError(f"unknown series {s!r}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ParameterError("trials must be an integer >= 1")
        if not 0.0 < self.source_fraction < 1.0:
            raise ParameterError("source_fraction must lie in (0, 1)")
        if self.budget_mode not in ("sum", "individual"):
            raise ParameterError("budget_mode must be 'sum' or 'individual'")
        if "individual" in self.schemes and self.budget_mode != "individual":
            raise ParameterError("the individual scheme needs budget_mode = individual")
        if any(int(b) != b or b < 0 for b in self.bits):
            raise ParameterError("bits must be nonnegative integers")
        if any(int(n) != n or n < 1 for n in self.n_grid) or int(self.n) != self.n or self.n < 1:
            raise ParameterError("subcarrier counts must be integers >= 1")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        Scheme.parse(self.feedback_scheme)
        grid = self.grid()
        if len(grid) == 0:
            raise ParameterError(f"the {self.kind} grid is empty")
        if self.kind == "feedback_bits" and not self.bits:
            raise ParameterError("a feedback_bits sweep needs a bits list")
        if self.kind == "gapstats" and not self.schemes:
            raise ParameterError("gapstats needs at least one scheme")
        if self.kind == "gapstats" and any(s not in SOLVER_SERIES for s in self.schemes):
            raise ParameterError("gapstats only applies to solver schemes")
        if self.bits:
            need = 16 * 2 ** max(self.bits)
            if self.training_size < need:
                raise ParameterError(f"training_size must be >= {need} for {max(self.bits)} bits")

    def grid(self) -> tuple:
        return {"snr": self.snr_db, "subcarriers": self.n_grid, "location": self.d_grid,
                "feedback_bits": self.bits, "gapstats": self.n_grid}[self.kind]

    def point(self, x) -> tuple[int, float, float]:
        """(N, d, snr_db) at grid value x."""
        n, d, snr = self.n, self.d, self.snr_db[0] if self.snr_db else 10.0
        if self.kind == "snr":
            snr = float(x)
        elif self.kind in ("subcarriers", "gapstats"):
            n = int(x)
        elif self.kind == "location":
            d = float(x)
        return n, d, snr

    def budget(self, n: int, snr_db: float) -> PowerBudget:
        total = snr_db_to_budget(snr_db, n)
        if self.budget_mode == "individual":
            return PowerBudget.split(total, self.source_fraction)
        return PowerBudget(total=total)

    def draw_grid(self, grid: int) -> int:
        """Grid key used for seeding; common draws reuse one fading sequence across the grid."""
        return 0 if self.common_draws else grid

    def options(self) -> SolverOptions:
        return SolverOptions(max_iter=self.max_iter, eps=self.eps)

    def series(self) -> tuple:
        """Output series names in column order."""
        if self.kind == "feedback_bits":
            return tuple(self.schemes) + ("feedback",)
        fb = tuple(f"{self.feedback_scheme}_{b}bit" for b in self.bits)
        return tuple(self.schemes) + fb

    def echo(self) -> list[tuple[str, str]]:
        out = []
        for k, v in asdict(self).items():
            if isinstance(v, tuple):
                v = ",".join(_fmt_scalar(x) for x in v)
            else:
                v = _fmt_scalar(v)
            out.append((k, v))
        return out


@dataclass
class SeriesStats:
    mean: float
    stderr: float
    gap: float
    fail_frac: float
    extras: dict = field(default_factory=dict)


@dataclass
class CurvePoint:
    x: float
    stats: dict
    samples: dict = field(default_factory=dict, repr=False, compare=False)


def trial_seed(seed: int, stream: int, grid: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(stream, grid, trial))


def _fmt_scalar(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return str(v)


def _fmt_float(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


# -- per-trial work (module level so worker processes can pickle it) -----------------

@dataclass(frozen=True)
class _Task:
    cfg: ExperimentConfig
    grid: int
    trial: int
    n: int
    d: float
    snr_db: float
    codebooks: tuple = ()


def _solver_outcome(h: GainSet, budget: PowerBudget, scheme: str, opts: SolverOptions, cache: dict):
    if scheme == "enhanced" and "selective" in cache:
        from .solvers import solve_enhanced_sum
        alloc = solve_enhanced_sum(h, PowerBudget(total=budget.total), opts, selective=cache["selective"])
    else:
        b = budget if scheme == "individual" else PowerBudget(total=budget.total)
        alloc = solve(h, b, scheme, opts)
    recompute_rate(alloc, h)
    cache[scheme] = alloc
    return alloc


def _run_trial(task: _Task) -> dict:
    cfg = task.cfg
    geom = Geometry(d=task.d, path_loss_exp=cfg.path_loss_exp)
    h = draw_gains(task.n, geom, trial_seed(cfg.seed, EVAL_STREAM, cfg.draw_grid(task.grid), task.trial))
    budget = cfg.budget(task.n, task.snr_db)
    opts = cfg.options()
    out: dict = {}
    cache: dict = {}
    order = sorted(cfg.schemes, key=lambda s: s != "selective")
    for s in order:
        if s in SOLVER_SERIES:
            alloc = _solver_outcome(h, budget, s, opts, cache)
            rec = {"rate": alloc.sum_rate, "gap": alloc.gap_estimate, "fail": not alloc.converged}
            if cfg.kind == "gapstats":
                orc = exhaustive_solve(h, budget if s == "individual" else PowerBudget(total=budget.total), s)
                rel = (alloc.dual_value - orc.best_rate) / orc.best_rate if orc.best_rate > 0 else 0.0
                rec["gap"] = max(rel, 0.0)
                rec["oracle_rate"] = orc.best_rate
            out[s] = rec
        else:
            alloc = BASELINES[s](h, PowerBudget(total=budget.total))
            recompute_rate(alloc, h)
            out[s] = {"rate": alloc.sum_rate, "gap": math.nan, "fail": False}
    for name, C in task.codebooks:
        out[name] = {"rate": float(codebook_rates(C, [h]).max()), "gap": math.nan, "fail": False}
    return out


def _train_solve(args) -> object:
    from .codebook import Codeword
    cfg, grid, i, n, d, snr = args
    geom = Geometry(d=d, path_loss_exp=cfg.path_loss_exp)
    h = draw_gains(n, geom, trial_seed(cfg.seed, TRAIN_STREAM, cfg.draw_grid(grid), i))
    budget = cfg.budget(n, snr)
    scheme = Scheme.parse(cfg.feedback_scheme)
    b = budget if scheme is Scheme.ENHANCED_INDIVIDUAL else PowerBudget(total=budget.total)
    return h, Codeword.from_allocation(solve(h, b, scheme, cfg.options()))


def _map(fn: Callable, items: Sequence, workers: int, pool) -> list:
    if pool is None:
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (4 * workers))
    return list(pool.map(fn, items, chunksize=chunk))


def _codebooks(cfg: ExperimentConfig, grid: int, n: int, d: float, snr: float, pool) -> tuple:
    from .codebook import TrainingSet
    if not cfg.bits:
        return ()
    pairs = _map(_train_solve, [(cfg, grid, i, n, d, snr) for i in range(cfg.training_size)], cfg.workers, pool)
    H = TrainingSet([p[0] for p in pairs], [p[1] for p in pairs])
    budget = cfg.budget(n, snr)
    out = []
    for b in cfg.bits:
        C = train_codebook(H, int(b), cfg.lloyd_eps, seed=cfg.seed, scheme=cfg.feedback_scheme, budget=budget)
        name = f"feedback_{b}" if cfg.kind == "feedback_bits" else f"{cfg.feedback_scheme}_{b}bit"
        out.append((name, C))
    return tuple(out)


def _reduce(x, series: Sequence[str], results: list[dict]) -> CurvePoint:
    stats = {}
    samples = {}
    for s in series:
        rates = np.array([r[s]["rate"] for r in results])
        gaps = np.array([r[s]["gap"] for r in results])
        fails = np.array([r[s]["fail"] for r in results], dtype=float)
        t = len(rates)
        stderr = float(np.std(rates, ddof=1) / math.sqrt(t)) if t > 1 else 0.0
        gap = float(np.mean(gaps)) if not np.all(np.isnan(gaps)) else math.nan
        extras = {}
        if "oracle_rate" in results[0][s]:
            extras["gap_frac"] = float(np.mean(gaps > GAP_THRESHOLD))
        stats[s] = SeriesStats(float(np.mean(rates)), stderr, gap, float(np.mean(fails)), extras)
        samples[s] = rates
    return CurvePoint(float(x), stats, samples)


def run_sweep(cfg: ExperimentConfig) -> list[CurvePoint]:
    """Run every grid point of ``cfg``; output order follows the grid."""
    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        points = []
        if cfg.kind == "feedback_bits":
            n, d, snr = cfg.point(None)
            books = _codebooks(cfg, 0, n, d, snr, pool)
            tasks = [_Task(cfg, 0, t, n, d, snr, books) for t in range(cfg.trials)]
            results = _map(_run_trial, tasks, cfg.workers, pool)
            for b in cfg.bits:
                key = f"feedback_{b}"
                view = [{**{s: r[s] for s in cfg.schemes}, "feedback": r[key]} for r in results]
                points.append(_reduce(b, cfg.series(), view))
            return points
        for g, x in enumerate(cfg.grid()):
            n, d, snr = cfg.point(x)
            books = _codebooks(cfg, g, n, d, snr, pool)
            tasks = [_Task(cfg, g, t, n, d, snr, books) for t in range(cfg.trials)]
            results = _map(_run_trial, tasks, cfg.workers, pool)
            points.append(_reduce(x, cfg.series(), results))
        return points
    finally:
        if pool is not None:
            pool.shutdown()


def csv_text(points: Sequence[CurvePoint], cfg: ExperimentConfig | None = None, series: Sequence[str] | None = None) -> str:
    if series is None:
        if cfg is not None:
            series = cfg.series()
        elif points:
            series = tuple(points[0].stats)
        else:
            series = ()
    buf = io.StringIO()
    buf.write("# dfrelay sweep\n")
    buf.write(f"# snr_definition: {SNR_DEFINITION}\n")
    buf.write("# rng: PCG64, SeedSequence(entropy=seed, spawn_key=(stream, grid, trial)); stream 0 evaluation, 1 training\n")
    if cfg is not None:
        for k, v in cfg.echo():
            buf.write(f"# {k} = {v}\n")
    cols = ["x"]
    extra_cols = []
    if points:
        for s in series:
            for e in points[0].stats[s].extras:
                extra_cols.append((s, e))
    for s in series:
        cols += [f"{s}_mean", f"{s}_stderr", f"{s}_gap", f"{s}_fail_frac"]
    cols += [f"{s}_{e}" for s, e in extra_cols]
    buf.write(",".join(cols) + "\n")
    for p in points:
        row = [_fmt_float(p.x)]
        for s in series:
            st = p.stats[s]
            row += [_fmt_float(st.mean), _fmt_float(st.stderr), _fmt_float(st.gap), _fmt_float(st.fail_frac)]
        row += [_fmt_float(p.stats[s].extras[e]) for s, e in extra_cols]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def emit_csv(points: Sequence[CurvePoint], destination, cfg: ExperimentConfig | None = None) -> None:
    """Write points as CSV to a path or a text stream."""
    text = csv_text(points, cfg)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {os.fspath(destination)}: {exc}") from exc
