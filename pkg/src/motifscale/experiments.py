"""Experiment harness: generate graphs, count motifs, fit scaling, emit tables.

Plans are plain-text ``key = value`` files.  Every run writes a deterministic
CSV body (identical bytes for identical seeds), a JSON manifest carrying the
plan, versions, and wall-clock, and rendered PNG figures next to the CSV.
Predicted exponents always come from the structure optimizer; nothing here
hardcodes a scaling exponent.
"""
from __future__ import annotations

import csv
import io
import json
import math
import platform
import re
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import __version__
from .census import (
    CensusResourceError,
    count_cliques,
    count_star_subgraphs,
    count_induced,
    count_subgraph,
    count_with_windows,
)
from .constants import tensor_quadrature_A
from .generate import (
    DegreeSequence,
    check_Jn,
    derive_seed,
    generate_rank1,
    pair_half_edges,
    sample_degrees,
    window_bounds,
)
from .motifs import MotifGraph, motif_by_name
from .optimize import continuous_objective, optimize, parse_tau


class PlanError(ValueError):
    """A plan file is missing keys, has bad values, or is inconsistent."""


PLAN_KINDS = ("scaling", "ratio", "self_averaging")
_DEFAULT_EPS = Fraction(1, 10)


# --- plan files ------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentPlan:
    kind: str
    tau: Fraction
    n_grid: tuple[int, ...]
    replications: int
    motifs: tuple[str, ...]
    modes: tuple[str, ...]
    engine: str
    eps: Fraction
    seed: int
    out: Path
    generator: str
    ceiling: int | None
    window_motifs: tuple[str, ...] = ()
    alpha_star: tuple[Fraction, ...] | None = None
    alpha_alt: tuple[Fraction, ...] | None = None

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "tau": str(self.tau),
            "n_grid": list(self.n_grid),
            "replications": self.replications,
            "motifs": list(self.motifs),
            "modes": list(self.modes),
            "engine": self.engine,
            "eps": str(self.eps),
            "seed": self.seed,
            "out": str(self.out),
            "generator": self.generator,
            "ceiling": self.ceiling,
            "window_motifs": list(self.window_motifs),
            "alpha_star": None if self.alpha_star is None
            else [str(a) for a in self.alpha_star],
            "alpha_alt": None if self.alpha_alt is None
            else [str(a) for a in self.alpha_alt],
        }


def _plan_fields(text: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PlanError(f"plan line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        if key in fields:
            raise PlanError(f"plan line {lineno}: duplicate key {key!r}")
        fields[key] = value.strip()
    return fields


def _parse_alpha_vector(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(part.strip()) for part in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise PlanError(f"bad alpha vector {text!r}: {exc}") from None


def parse_plan(path) -> ExperimentPlan:
    """Parse a plain-text key = value plan file.

    Recognized keys: kind (scaling | ratio | self_averaging), tau, n_grid,
    replications, motifs, mode, engine (auto | generic | clique | star),
    eps, seed, out, generator (ecm | rank1), ceiling, window_motifs,
    alpha_star, alpha_alt.  Lists are comma-separated; '#' starts a comment.
    """
    path = Path(path)
    try:
        fields = _plan_fields(path.read_text())
    except OSError as exc:
        raise PlanError(f"cannot read plan {path}: {exc}") from None
    known = {"kind", "tau", "n_grid", "replications", "motifs", "mode",
             "engine", "eps", "seed", "out", "generator", "ceiling",
             "window_motifs", "alpha_star", "alpha_alt"}
    unknown = set(fields) - known
    if unknown:
        raise PlanError(f"unknown plan key(s): {', '.join(sorted(unknown))}")

    def need(key: str) -> str:
        if key not in fields:
            raise PlanError(f"plan is missing required key {key!r}")
        return fields[key]

    kind = need("kind").lower()
    if kind not in PLAN_KINDS:
        raise PlanError(f"kind must be one of {PLAN_KINDS}, got {kind!r}")
    try:
        tau = parse_tau(need("tau"))
    except ValueError as exc:
        raise PlanError(str(exc)) from None
    try:
        n_grid = tuple(int(part) for part in need("n_grid").split(","))
    except ValueError:
        raise PlanError(f"bad n_grid {fields.get('n_grid')!r}") from None
    if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])) or n_grid[0] < 1:
        raise PlanError("n_grid must be a strictly increasing list of positive integers")
    try:
        reps = int(need("replications"))
    except ValueError:
        raise PlanError(f"bad replications {fields.get('replications')!r}") from None
    if reps < 1:
        raise PlanError("replications must be >= 1")

    motifs = tuple(tok.strip() for tok in need("motifs").split(",") if tok.strip())
    if not motifs:
        raise PlanError("motifs list is empty")
    for tok in motifs:
        try:
            motif_by_name(tok)
        except Exception as exc:
            raise PlanError(f"bad motif {tok!r}: {exc}") from None

    modes = tuple(m.strip().lower() for m in fields.get("mode", "sub").split(","))
    for m in modes:
        if m not in ("sub", "ind"):
            raise PlanError(f"mode must be sub or ind, got {m!r}")
    engine = fields.get("engine", "auto").lower()
    if engine not in ("auto", "generic", "clique", "star"):
        raise PlanError(f"unknown engine {engine!r}")
    try:
        eps = Fraction(fields.get("eps", str(_DEFAULT_EPS)))
    except (ValueError, ZeroDivisionError):
        raise PlanError(f"bad eps {fields.get('eps')!r}") from None
    if not 0 < eps < 1:
        raise PlanError(f"eps must lie in (0, 1), got {eps}")
    try:
        seed = int(fields.get("seed", "0"))
    except ValueError:
        raise PlanError(f"bad seed {fields.get('seed')!r}") from None
    out = Path(fields.get("out", "motifscale_out"))
    generator = fields.get("generator", "ecm").lower()
    if generator not in ("ecm", "rank1"):
        raise PlanError(f"generator must be ecm or rank1, got {generator!r}")
    ceiling = None
    if "ceiling" in fields:
        try:
            ceiling = int(fields["ceiling"])
        except ValueError:
            raise PlanError(f"bad ceiling {fields['ceiling']!r}") from None

    window_motifs = tuple(
        tok.strip() for tok in fields.get("window_motifs", "").split(",") if tok.strip()
    )
    for tok in window_motifs:
        if tok not in motifs:
            raise PlanError(f"window_motifs entry {tok!r} is not in motifs")

    alpha_star = alpha_alt = None
    if "alpha_star" in fields:
        alpha_star = _parse_alpha_vector(fields["alpha_star"])
    if "alpha_alt" in fields:
        alpha_alt = _parse_alpha_vector(fields["alpha_alt"])
    if kind == "ratio":
        if alpha_star is None or alpha_alt is None:
            raise PlanError("ratio plans need alpha_star and alpha_alt")
        if len(motifs) != 1:
            raise PlanError("ratio plans take exactly one motif")
        k = motif_by_name(motifs[0]).k
        if len(alpha_star) != k or len(alpha_alt) != k:
            raise PlanError(f"alpha vectors must have {k} coordinates")

    return ExperimentPlan(
        kind=kind, tau=tau, n_grid=n_grid, replications=reps, motifs=motifs,
        modes=modes, engine=engine, eps=eps, seed=seed, out=out,
        generator=generator, ceiling=ceiling, window_motifs=window_motifs,
        alpha_star=alpha_star, alpha_alt=alpha_alt,
    )


# --- shared plumbing --------------------------------------------------------------


def _slug(token: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", token).strip("-") or "motif"


def _generate(plan: ExperimentPlan, ni: int, rep: int):
    d = sample_degrees(plan.n_grid[ni], plan.tau, derive_seed(plan.seed, ni, rep, 0))
    pair_seed = derive_seed(plan.seed, ni, rep, 1)
    if plan.generator == "rank1":
        g = generate_rank1(d, pair_seed)
    else:
        g = pair_half_edges(d, pair_seed)
    return d, g


def _pick_engine(plan_engine: str, h: MotifGraph, mode: str) -> str:
    if plan_engine != "auto":
        return plan_engine
    if h.is_complete:
        return "clique"
    if h.is_star and mode == "sub":
        return "star"
    return "generic"


def _count(g, h: MotifGraph, mode: str, engine: str, ceiling) -> int:
    if engine == "clique":
        if not h.is_complete:
            raise ValueError("clique engine requires a complete motif")
        return count_cliques(g, h.k, ceiling=ceiling)
    if engine == "star":
        if not (h.is_star and mode == "sub"):
            raise ValueError("star engine counts star subgraphs only")
        return count_star_subgraphs(g, h.k - 1)
    if mode == "sub":
        return count_subgraph(g, h, ceiling=ceiling).count
    return count_induced(g, h, ceiling=ceiling).count


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def _write_manifest(path: Path, plan: ExperimentPlan, extra: dict,
                    outputs: list[Path], started: float) -> None:
    payload = {
        "plan": plan.describe(),
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "started_unix": started,
        "wall_seconds": time.time() - started,
        "outputs": [p.name for p in outputs],
    }
    payload.update(extra)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# --- slope fitting ----------------------------------------------------------------


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    n_points: int


def fit_log_slope(points) -> SlopeFit:
    """OLS slope of log(value) against log(n).

    Nonpositive values are excluded with a warning; fewer than three
    surviving distinct n is an error.  The standard error comes from the
    residual variance.
    """
    usable = []
    for n, v in points:
        if v <= 0 or not math.isfinite(v):
            warnings.warn(f"dropping nonpositive value {v!r} at n={n} from slope fit")
            continue
        usable.append((math.log(n), math.log(v)))
    if len({x for x, _ in usable}) < 3:
        raise ValueError("slope fit needs at least 3 distinct n with positive values")
    xs = np.array([x for x, _ in usable])
    ys = np.array([y for _, y in usable])
    xbar = xs.mean()
    sxx = float(((xs - xbar) ** 2).sum())
    slope = float(((xs - xbar) * (ys - ys.mean())).sum() / sxx)
    intercept = float(ys.mean() - slope * xbar)
    resid = ys - (intercept + slope * xs)
    dof = len(usable) - 2
    stderr = float(math.sqrt((resid @ resid) / dof / sxx)) if dof > 0 else 0.0
    return SlopeFit(slope=slope, stderr=stderr, n_points=len(usable))


# --- scaling experiment -----------------------------------------------------------


@dataclass(frozen=True)
class ScalingCell:
    motif: str
    mode: str
    engine: str
    n: int
    replication: int
    count: int | None
    rescaled: float | None
    exponent_value: float
    exponent_text: str
    unique: bool
    log_correction_possible: bool
    jn_flag: bool
    self_loops_erased: int
    multi_edges_erased: int
    simple_edges: int
    window_labeled: int | None
    window_rescaled: float | None
    status: str
    elapsed_s: float


@dataclass(frozen=True)
class ScalingResult:
    plan: ExperimentPlan
    cells: tuple[ScalingCell, ...]
    slopes: dict
    csv_path: Path
    manifest_path: Path
    figure_paths: tuple[Path, ...] = field(default=())

    def mean_counts(self, motif: str, mode: str) -> list[tuple[int, float]]:
        out = []
        for n in self.plan.n_grid:
            vals = [c.count for c in self.cells
                    if c.motif == motif and c.mode == mode and c.n == n
                    and c.status == "ok"]
            if vals:
                out.append((n, float(np.mean(vals))))
        return out

    def mean_window_rescaled(self, motif: str, mode: str) -> list[tuple[int, float]]:
        out = []
        for n in self.plan.n_grid:
            vals = [c.window_rescaled for c in self.cells
                    if c.motif == motif and c.mode == mode and c.n == n
                    and c.window_rescaled is not None]
            if vals:
                out.append((n, float(np.mean(vals))))
        return out


_SCALING_HEADER = [
    "motif", "mode", "engine", "n", "replication", "count", "rescaled",
    "exponent_value", "exponent_text", "unique", "log_correction_possible",
    "jn_flag", "self_loops_erased", "multi_edges_erased", "simple_edges",
    "window_labeled", "window_rescaled", "status",
]


def run_scaling_experiment(plan: ExperimentPlan) -> ScalingResult:
    """Generate graphs over the n-grid and count every motif in every mode.

    Each (n, replication) cell produces one graph shared by all motifs.
    Rows record raw and rescaled counts (the exponent comes from the
    optimizer), the total-degree concentration flag, erasure statistics,
    and optional sqrt(n)-window labeled counts for motifs listed in
    window_motifs.  Resource-ceiling aborts mark the cell and continue.
    Outputs: results CSV, JSON manifest, and one log-log figure per
    (motif, mode).
    """
    if plan.kind != "scaling":
        raise PlanError(f"expected a scaling plan, got kind={plan.kind!r}")
    started = time.time()
    plan.out.mkdir(parents=True, exist_ok=True)
    motifs = {tok: motif_by_name(tok) for tok in plan.motifs}
    hints = {}
    for tok, h in motifs.items():
        for mode in plan.modes:
            opt = optimize(h, plan.tau, mode=mode)
            hints[tok, mode] = opt
    win_exponent = {}
    for tok in plan.window_motifs:
        h = motifs[tok]
        half = tuple(Fraction(1, 2) for _ in range(h.k))
        for mode in plan.modes:
            obj = continuous_objective(h, half, plan.tau, mode=mode)
            win_exponent[tok, mode] = float(h.k + obj)

    cells: list[ScalingCell] = []
    for ni, n in enumerate(plan.n_grid):
        for rep in range(plan.replications):
            d, g = _generate(plan, ni, rep)
            jn = check_Jn(d)
            for tok, h in motifs.items():
                for mode in plan.modes:
                    engine = _pick_engine(plan.engine, h, mode)
                    opt = hints[tok, mode]
                    exp_val = float(opt.exponent_value)
                    t0 = time.perf_counter()
                    status = "ok"
                    count: int | None = None
                    rescaled: float | None = None
                    try:
                        count = _count(g, h, mode, engine, plan.ceiling)
                        rescaled = count / n ** exp_val
                    except CensusResourceError:
                        status = "resource_ceiling"
                    win_labeled = win_rescaled = None
                    if status == "ok" and tok in plan.window_motifs:
                        lo, hi = window_bounds(n, plan.tau, Fraction(1, 2), plan.eps)
                        wrep = count_with_windows(
                            g, d, h, [(lo, hi)] * h.k, mode=mode,
                            ceiling=plan.ceiling,
                        )
                        win_labeled = wrep.labeled_embeddings
                        win_rescaled = win_labeled / n ** win_exponent[tok, mode]
                    cells.append(ScalingCell(
                        motif=tok, mode=mode, engine=engine, n=n, replication=rep,
                        count=count, rescaled=rescaled, exponent_value=exp_val,
                        exponent_text=opt.exponent.text, unique=opt.unique,
                        log_correction_possible=not opt.unique, jn_flag=jn,
                        self_loops_erased=g.erased_self_loops,
                        multi_edges_erased=g.erased_multi_edges,
                        simple_edges=g.simple_edge_count,
                        window_labeled=win_labeled, window_rescaled=win_rescaled,
                        status=status, elapsed_s=time.perf_counter() - t0,
                    ))

    rows = [[
        c.motif, c.mode, c.engine, c.n, c.replication,
        "" if c.count is None else c.count,
        "" if c.rescaled is None else repr(c.rescaled),
        repr(c.exponent_value), c.exponent_text,
        str(c.unique).lower(), str(c.log_correction_possible).lower(),
        str(c.jn_flag).lower(), c.self_loops_erased, c.multi_edges_erased,
        c.simple_edges,
        "" if c.window_labeled is None else c.window_labeled,
        "" if c.window_rescaled is None else repr(c.window_rescaled),
        c.status,
    ] for c in cells]
    csv_path = plan.out / "scaling_results.csv"
    _write_csv(csv_path, _SCALING_HEADER, rows)

    draft = ScalingResult(
        plan=plan, cells=tuple(cells), slopes={},
        csv_path=csv_path, manifest_path=plan.out / "scaling_manifest.json",
    )
    slopes = {}
    for tok in plan.motifs:
        for mode in plan.modes:
            pts = draft.mean_counts(tok, mode)
            try:
                slopes[tok, mode] = fit_log_slope(pts)
            except ValueError:
                continue
    draft = ScalingResult(
        plan=plan, cells=draft.cells, slopes=slopes,
        csv_path=csv_path, manifest_path=draft.manifest_path,
    )
    figures = _scaling_figures(draft)
    result = ScalingResult(
        plan=plan, cells=draft.cells, slopes=slopes, csv_path=csv_path,
        manifest_path=draft.manifest_path, figure_paths=tuple(figures),
    )
    timing = {}
    for (tok, mode) in slopes:
        vals = [c.elapsed_s for c in result.cells
                if c.motif == tok and c.mode == mode]
        timing[f"{tok}:{mode}"] = {"mean_s": float(np.mean(vals)),
                                   "max_s": float(np.max(vals))}
    _write_manifest(
        result.manifest_path, plan,
        {"slopes": {f"{tok}:{mode}": {"slope": s.slope, "stderr": s.stderr,
                                      "points": s.n_points}
                    for (tok, mode), s in slopes.items()},
         "count_timing": timing},
        [csv_path, *figures], started,
    )
    return result


def _scaling_figures(result: ScalingResult) -> list[Path]:
    paths = []
    for tok in result.plan.motifs:
        for mode in result.plan.modes:
            pts = result.mean_counts(tok, mode)
            if len(pts) < 2:
                continue
            ns = np.array([p[0] for p in pts], float)
            ys = np.array([p[1] for p in pts], float)
            fit = result.slopes.get((tok, mode))
            cell = next(c for c in result.cells
                        if c.motif == tok and c.mode == mode)
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.loglog(ns, ys, "o", label="mean count")
            ref = ys[0] * (ns / ns[0]) ** cell.exponent_value
            ax.loglog(ns, ref, "--",
                      label=f"theory slope {cell.exponent_value:.3g}")
            if fit is not None:
                lx = np.log(ns)
                ly = np.log(ys)
                anchor = ly.mean() + fit.slope * (lx - lx.mean())
                ax.loglog(ns, np.exp(anchor), ":",
                          label=f"fit {fit.slope:.3f}±{fit.stderr:.3f}")
            ax.set_xlabel("n")
            ax.set_ylabel(f"mean {mode} count")
            ax.set_title(f"{tok} ({mode})")
            ax.legend(fontsize=8)
            fig.tight_layout()
            path = result.plan.out / f"fig_scaling_{_slug(tok)}_{mode}.png"
            fig.savefig(path, dpi=150)
            plt.close(fig)
            paths.append(path)
    return paths


# --- ratio experiment -------------------------------------------------------------


@dataclass(frozen=True)
class RatioCell:
    n: int
    rep: int
    count_star: int
    count_alt: int


@dataclass(frozen=True)
class RatioResult:
    plan: ExperimentPlan
    motif: str
    cells: tuple[RatioCell, ...]
    ratios: tuple[float, ...]
    strictly_decreasing: bool
    trend: float
    zero_denominator: bool
    csv_path: Path
    manifest_path: Path
    figure_path: Path


def run_ratio_experiment(plan: ExperimentPlan, h: MotifGraph,
                         alpha_star, alpha_alt) -> RatioResult:
    """Windowed-count ratio between an alternative degree placement and the optimizer's.

    One run is one seed family.  At each n it generates plan.replications
    independent graphs, counts labeled embeddings of h with vertex v confined
    to the window around (mu*n)^{alpha_v} -- once with the optimizer's alpha
    and once with the alternative -- and pools the counts over replications,
    giving a single ratio alt/star per grid point.  Reports the ratio
    sequence, a Kendall-style monotone-trend statistic over all grid pairs,
    and whether the sequence is strictly decreasing.  alpha_star must equal
    the optimizer's alpha for the motif (validated); a zero pooled
    denominator at any n is flagged and fails the strict-decrease verdict.
    """
    mode = plan.modes[0]
    tau = plan.tau
    alpha_star = tuple(Fraction(a) for a in alpha_star)
    alpha_alt = tuple(Fraction(a) for a in alpha_alt)
    opt = optimize(h, tau, mode=mode)
    if tuple(opt.alpha) != alpha_star:
        raise ValueError(
            f"alpha_star {tuple(str(a) for a in alpha_star)} does not match the "
            f"optimizer's {tuple(str(a) for a in opt.alpha)} for mode={mode}"
        )
    limit = Fraction(1, tau - 1)
    for vec, name in ((alpha_star, "alpha_star"), (alpha_alt, "alpha_alt")):
        if len(vec) != h.k:
            raise ValueError(f"{name} must have {h.k} coordinates")
        if any(a < 0 or a > limit for a in vec):
            raise ValueError(f"{name} coordinates must lie in [0, 1/(tau-1)]")

    started = time.time()
    plan.out.mkdir(parents=True, exist_ok=True)
    cells: list[RatioCell] = []
    ratios: list[float] = []
    zero_denominator = False
    for ni, n in enumerate(plan.n_grid):
        wins_star = [window_bounds(n, tau, a, plan.eps) for a in alpha_star]
        wins_alt = [window_bounds(n, tau, a, plan.eps) for a in alpha_alt]
        pooled_star = 0
        pooled_alt = 0
        for rep in range(plan.replications):
            d, g = _generate(plan, ni, rep)
            c_star = count_with_windows(g, d, h, wins_star, mode=mode,
                                        ceiling=plan.ceiling).labeled_embeddings
            c_alt = count_with_windows(g, d, h, wins_alt, mode=mode,
                                       ceiling=plan.ceiling).labeled_embeddings
            pooled_star += c_star
            pooled_alt += c_alt
            cells.append(RatioCell(n=n, rep=rep, count_star=c_star,
                                   count_alt=c_alt))
        if pooled_star == 0:
            zero_denominator = True
            ratios.append(float("nan"))
        else:
            ratios.append(pooled_alt / pooled_star)

    strict = (not zero_denominator
              and all(b < a for a, b in zip(ratios, ratios[1:])))
    finite = [r for r in ratios if not math.isnan(r)]
    dec = sum(1 for i in range(len(finite)) for j in range(i + 1, len(finite))
              if finite[j] < finite[i])
    inc = sum(1 for i in range(len(finite)) for j in range(i + 1, len(finite))
              if finite[j] > finite[i])
    pairs = len(finite) * (len(finite) - 1) // 2
    trend = (dec - inc) / pairs if pairs else 0.0

    rows = [[c.n, c.rep, c.count_star, c.count_alt] for c in cells]
    csv_path = plan.out / "ratio_results.csv"
    _write_csv(csv_path, ["n", "replication", "count_star", "count_alt"], rows)

    fig, ax = plt.subplots(figsize=(5, 4))
    per_rep_n = []
    per_rep_ratio = []
    for c in cells:
        if c.count_star > 0:
            per_rep_n.append(c.n)
            per_rep_ratio.append(c.count_alt / c.count_star)
    ax.scatter(per_rep_n, per_rep_ratio, s=6, color="steelblue", alpha=0.25,
               label="per replication")
    ax.plot(plan.n_grid, ratios, color="crimson", marker="o",
            label="pooled over replications")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("windowed count ratio alt / star")
    ax.set_title(f"{plan.motifs[0]}: alternative vs optimal degree placement")
    ax.legend(fontsize=8)
    fig.tight_layout()
    figure_path = plan.out / "fig_ratio.png"
    fig.savefig(figure_path, dpi=150)
    plt.close(fig)

    result = RatioResult(
        plan=plan, motif=plan.motifs[0], cells=tuple(cells),
        ratios=tuple(ratios), strictly_decreasing=strict, trend=trend,
        zero_denominator=zero_denominator, csv_path=csv_path,
        manifest_path=plan.out / "ratio_manifest.json", figure_path=figure_path,
    )
    _write_manifest(
        result.manifest_path, plan,
        {"ratios": {str(n): r for n, r in zip(plan.n_grid, ratios)},
         "strictly_decreasing": strict, "trend": trend,
         "zero_denominator": zero_denominator},
        [csv_path, figure_path], started,
    )
    return result


# --- self-averaging probe ---------------------------------------------------------


@dataclass(frozen=True)
class SelfAveragingReport:
    plan: ExperimentPlan
    motif: str
    counts_iid: dict[int, tuple[int, ...]]
    counts_fixed: dict[int, tuple[int, ...]]
    ratio_iid: dict[int, float]
    ratio_fixed: dict[int, float]
    csv_path: Path
    manifest_path: Path
    figure_path: Path


def self_averaging_probe(plan: ExperimentPlan, h: MotifGraph) -> SelfAveragingReport:
    """Compare count fluctuations with fresh degrees vs a fixed degree sequence.

    Two ensembles per n: (iid) fresh degrees and pairing every replication;
    (fixed) one degree sequence drawn once, re-paired every replication.
    Reports Var/Mean^2 for each; the fluctuation of square-root-class counts
    should come almost entirely from the degree draw.
    """
    if plan.replications < 2:
        raise ValueError("self-averaging probe needs at least 2 replications")
    mode = plan.modes[0]
    opt = optimize(h, plan.tau, mode=mode)
    if opt.value != 0 or not opt.unique:
        raise ValueError(
            f"motif is outside the square-root class (B={opt.value}, "
            f"unique={opt.unique}); Var/Mean^2 has no constant-limit baseline"
        )
    started = time.time()
    plan.out.mkdir(parents=True, exist_ok=True)
    engine = _pick_engine(plan.engine, h, mode)
    counts_iid: dict[int, tuple[int, ...]] = {}
    counts_fixed: dict[int, tuple[int, ...]] = {}
    for ni, n in enumerate(plan.n_grid):
        iid = []
        for rep in range(plan.replications):
            d, g = _generate(plan, ni, rep)
            iid.append(_count(g, h, mode, engine, plan.ceiling))
        d0 = sample_degrees(n, plan.tau, derive_seed(plan.seed, ni, 0, 2))
        fixed = []
        for rep in range(plan.replications):
            pair_seed = derive_seed(plan.seed, ni, rep, 3)
            if plan.generator == "rank1":
                g = generate_rank1(d0, pair_seed)
            else:
                g = pair_half_edges(d0, pair_seed)
            fixed.append(_count(g, h, mode, engine, plan.ceiling))
        counts_iid[n] = tuple(iid)
        counts_fixed[n] = tuple(fixed)

    def ratio(values: tuple[int, ...]) -> float:
        arr = np.array(values, float)
        m = arr.mean()
        return float(arr.var(ddof=1) / (m * m))

    ratio_iid = {n: ratio(v) for n, v in counts_iid.items()}
    ratio_fixed = {n: ratio(v) for n, v in counts_fixed.items()}

    rows = []
    for n in plan.n_grid:
        for rep, c in enumerate(counts_iid[n]):
            rows.append(["iid", n, rep, c])
        for rep, c in enumerate(counts_fixed[n]):
            rows.append(["fixed", n, rep, c])
    csv_path = plan.out / "self_averaging_results.csv"
    _write_csv(csv_path, ["ensemble", "n", "replication", "count"], rows)

    fig, ax = plt.subplots(figsize=(5, 4))
    ns = list(plan.n_grid)
    ax.plot(ns, [ratio_iid[n] for n in ns], "o-", label="fresh degrees")
    ax.plot(ns, [ratio_fixed[n] for n in ns], "s-", label="fixed degrees")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("Var / Mean$^2$")
    ax.set_title(f"{plan.motifs[0]}: count fluctuation by ensemble")
    ax.legend(fontsize=8)
    fig.tight_layout()
    figure_path = plan.out / "fig_self_averaging.png"
    fig.savefig(figure_path, dpi=150)
    plt.close(fig)

    report = SelfAveragingReport(
        plan=plan, motif=plan.motifs[0], counts_iid=counts_iid,
        counts_fixed=counts_fixed, ratio_iid=ratio_iid, ratio_fixed=ratio_fixed,
        csv_path=csv_path, manifest_path=plan.out / "self_averaging_manifest.json",
        figure_path=figure_path,
    )
    _write_manifest(
        report.manifest_path, plan,
        {"var_over_mean2": {str(n): {"iid": ratio_iid[n], "fixed": ratio_fixed[n]}
                            for n in plan.n_grid}},
        [csv_path, figure_path], started,
    )
    return report


# --- atlas table ------------------------------------------------------------------


_ATLAS_HEADER = [
    "canonical_key", "k", "m", "mode", "tau", "B_a", "B_b",
    "exponent_c0", "exponent_c_tau", "exponent_c_inv", "exponent_text",
    "exponent_at_tau", "unique", "log_correction_possible", "assignment",
]


def emit_atlas_table(k: int, tau, mode: str):
    """One row per connected k-vertex class: optimizer value, exponent, flags.

    The machine-checkable analogue of the atlas figures: canonical key,
    partition-objective value as a + b/(tau-1), the count exponent both
    symbolically and at the given tau, the uniqueness flag (non-unique
    optimizers admit logarithmic corrections), and the optimizing
    assignment rendered as vertex: tier.
    """
    from .motifs import enumerate_connected_graphs

    tau = parse_tau(tau)
    if k not in (3, 4, 5):
        raise ValueError(f"atlas covers k in {{3,4,5}}, got {k}")
    rows = []
    for g in enumerate_connected_graphs(k):
        opt = optimize(g, tau, mode=mode)
        rows.append({
            "canonical_key": g.canonical_key.hex(),
            "k": g.k,
            "m": g.m,
            "mode": mode,
            "tau": str(tau),
            "B_a": str(opt.B.a),
            "B_b": str(opt.B.b),
            "exponent_c0": str(opt.exponent.c0),
            "exponent_c_tau": str(opt.exponent.c_tau),
            "exponent_c_inv": str(opt.exponent.c_inv),
            "exponent_text": opt.exponent.text,
            "exponent_at_tau": str(opt.exponent_value),
            "unique": opt.unique,
            "log_correction_possible": not opt.unique,
            "assignment": opt.optimizers[0].assignment_text(g),
        })
    return rows


def write_atlas_csv(rows, path) -> Path:
    path = Path(path)
    body = [[r["canonical_key"], r["k"], r["m"], r["mode"], r["tau"],
             r["B_a"], r["B_b"], r["exponent_c0"], r["exponent_c_tau"],
             r["exponent_c_inv"], r["exponent_text"], r["exponent_at_tau"],
             str(r["unique"]).lower(), str(r["log_correction_possible"]).lower(),
             r["assignment"]] for r in rows]
    _write_csv(path, _ATLAS_HEADER, body)
    return path
