"""
Subcommand handlers.
Each cmd_* does the work and returns a CommandResult; main.py decides where output goes.
"""

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from cli.generator import random_graph
from core.bigraph import BipartiteGraph, Side
from core.c4free import build_P, build_Q, build_R
from core.errors import ConstructionError, InvariantViolation
from core.extremal import (
    BUILDERS,
    Case,
    ConstructionParams,
    LabeledConstruction,
    check_obstruction,
    construction_for,
    obstruction_for,
    threshold,
    threshold_kss,
)
from core.solver import SearchBudget, has_factor, verify_factor
from core.tiler import TilerConfig, tile
from utils.formatters import (
    RunReport,
    factor_summary,
    format_construction_sidecar,
    format_factor,
    format_graph,
    format_sidecar,
    format_stats,
    format_sweep_csv,
)
from utils.logger import get_logger
from utils.parsers import load_graph, parse_factor, parse_sidecar

logger = get_logger(__name__)

GADGETS = {"P": build_P, "Q": build_Q, "R": build_R}
SIDECAR_SUFFIX = ".blocks.json"
FACTOR_SUFFIX = ".factor.json"


@dataclass
class CommandResult:
    """text is the primary output; extras map a file suffix to content written next to it."""

    text: str = ""
    report: Optional[RunReport] = None
    extras: Dict[str, str] = field(default_factory=dict)


def sidecar_path(graph_path: Path) -> Path:
    graph_path = Path(graph_path)
    return graph_path.with_name(graph_path.name + SIDECAR_SUFFIX)


def _min_degree_or_none(g: BipartiteGraph) -> Optional[int]:
    return g.min_degree() if g.n_a + g.n_b else None


def _threshold_or_none(g: BipartiteGraph, s: int, t: int) -> Optional[int]:
    if not g.is_balanced or g.n == 0 or g.n % (s + t):
        return None
    return threshold(s, t, g.n // (s + t))


# ----------------------------------------------------------------------
# construct
# ----------------------------------------------------------------------

def cmd_construct(case: str, s: Optional[int] = None, t: Optional[int] = None, k: Optional[int] = None,
                  m: Optional[int] = None, p: Optional[int] = None, q: Optional[int] = None,
                  fmt: str = "bge") -> CommandResult:
    """
    Build a lower-bound construction (even, odd-mid, odd-succ) or a gadget (P, Q, R).

    Returns:
        Graph text, with the block-label sidecar as an extra
    """
    if case in GADGETS:
        degree = p if case == "P" else q
        if m is None or degree is None:
            flag = "--p" if case == "P" else "--q"
            raise ValueError(f"Gadget {case} needs --m and {flag}")
        g = GADGETS[case](m, degree)
        params = {"m": m, ("p" if case == "P" else "q"): degree}
        sidecar = format_sidecar(case, params, {}, _min_degree_or_none(g))
        report = RunReport(
            instance={"case": case, **params},
            verdict="Built",
            min_degree=_min_degree_or_none(g),
            details={"n_a": g.n_a, "n_b": g.n_b, "edges": g.edge_count, "k22_free": g.is_k22_free()},
        )
        logger.info(f"Built {case}(m={m}, {degree}): {g.n_a}x{g.n_b}, {g.edge_count} edges")
        return CommandResult(format_graph(g, fmt), report, {SIDECAR_SUFFIX: sidecar})

    try:
        builder = BUILDERS[Case(case)]
    except ValueError:
        raise ValueError(f"Unknown construction {case!r}") from None
    if None in (s, t, k):
        raise ValueError(f"Construction {case} needs --s, --t and --k")
    params = ConstructionParams(s, t, k)
    try:
        c = builder(params)
    except ConstructionError as e:
        raise ConstructionError(f"{case} with s={s}, t={t}, k={k}: {e}") from e
    report = RunReport(
        instance={"case": case, "s": s, "t": t, "k": k},
        verdict="Built",
        min_degree=c.claimed_min_degree,
        threshold=threshold(s, t, k),
        details={"n": params.n, "edges": c.graph.edge_count, "blocks": {b: len(vs) for b, vs in c.blocks.items()}},
    )
    return CommandResult(format_graph(c.graph, fmt), report, {SIDECAR_SUFFIX: format_construction_sidecar(c)})


# ----------------------------------------------------------------------
# check / tile / certify
# ----------------------------------------------------------------------

def cmd_check(graph_file: Path, s: int, t: int, budget: Optional[SearchBudget] = None) -> CommandResult:
    """Exact search; the witness factor is attached when one is found."""
    g = load_graph(graph_file)
    start = time.perf_counter()
    result = has_factor(g, s, t, budget)
    elapsed = (time.perf_counter() - start) * 1000
    report = RunReport(
        instance={"file": str(graph_file), "s": s, "t": t},
        verdict=result.verdict.value,
        min_degree=_min_degree_or_none(g),
        threshold=_threshold_or_none(g, s, t),
        elapsed_ms=elapsed,
        details={"nodes": result.nodes, "route": result.route, **factor_summary(result.factor)},
    )
    logger.info(f"check {graph_file}: {result.verdict.value} ({result.nodes:,} nodes)")
    extras = {FACTOR_SUFFIX: format_factor(s, t, result.factor)} if result.factor is not None else {}
    return CommandResult(report=report, extras=extras)


def cmd_tile(graph_file: Path, s: int, t: int, alpha: Optional[float] = None,
             cfg: Optional[TilerConfig] = None) -> CommandResult:
    """Constructive tiling with exact fallback; a found factor is re-verified after a serialization round trip."""
    g = load_graph(graph_file)
    cfg = cfg or TilerConfig()
    if alpha is not None:
        cfg = TilerConfig(alpha=alpha, fallback_n_cap=cfg.fallback_n_cap,
                          fallback_budget=cfg.fallback_budget, base_pair_seeds=cfg.base_pair_seeds)
    start = time.perf_counter()
    result = tile(g, s, t, cfg)
    elapsed = (time.perf_counter() - start) * 1000

    extras = {}
    if result.factor is not None:
        text = format_factor(s, t, result.factor)
        _, _, reloaded = parse_factor(text)
        if not verify_factor(g, s, t, reloaded):
            raise InvariantViolation("Factor failed verification after reload")
        extras[FACTOR_SUFFIX] = text
    details = {"route": result.route, "alpha": cfg.alpha, **factor_summary(result.factor)}
    if result.case is not None:
        details["case"] = result.case
    if result.labeling is not None:
        details["labeling"] = result.labeling.sizes()
    report = RunReport(
        instance={"file": str(graph_file), "s": s, "t": t},
        verdict=result.verdict.value,
        min_degree=_min_degree_or_none(g),
        threshold=_threshold_or_none(g, s, t),
        elapsed_ms=elapsed,
        details=details,
    )
    logger.info(f"tile {graph_file}: {result.verdict.value} via {result.route}")
    return CommandResult(report=report, extras=extras)


def cmd_certify(graph_file: Path, case: str, s: int, t: int, k: int) -> CommandResult:
    """
    Check the no-factor certificate of a labelled construction.

    Raises:
        FileNotFoundError: the block-label sidecar is missing
    """
    g = load_graph(graph_file)
    path = sidecar_path(graph_file)
    if not path.exists():
        raise FileNotFoundError(f"Block-label sidecar {path} not found")
    sidecar = parse_sidecar(path.read_text())

    certified = False
    reason = ""
    if sidecar.case != case or sidecar.params != {"s": s, "t": t, "k": k}:
        reason = f"sidecar describes {sidecar.case} {sidecar.params}"
    else:
        try:
            c = LabeledConstruction(g, sidecar.blocks, sidecar.claimed_min_degree, Case(case), ConstructionParams(s, t, k))
            obstruction = obstruction_for(c)
        except KeyError as e:
            reason = f"missing block {e}"
        else:
            certified = check_obstruction(g, obstruction, s, t)
            reason = obstruction.kind.value

    report = RunReport(
        instance={"file": str(graph_file), "case": case, "s": s, "t": t, "k": k},
        verdict="Certified" if certified else "NotCertified",
        min_degree=_min_degree_or_none(g),
        threshold=threshold(s, t, k),
        details={"certified": certified, "reason": reason},
    )
    logger.info(f"certify {graph_file}: {report.verdict}")
    return CommandResult(report=report)


# ----------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------

# (s, t, k, kind, seed, density, node_limit, time_limit, alpha, fallback_n_cap)
SweepJob = Tuple[int, int, int, str, Optional[int], float, Optional[int], Optional[float], float, int]


def _run_sweep_job(job: SweepJob) -> Dict[str, object]:
    s, t, k, kind, seed, density, node_limit, time_limit, alpha, fallback_n_cap = job
    budget = SearchBudget(node_limit=node_limit, time_limit=time_limit)
    start = time.perf_counter()
    if kind == "random":
        n = k * (s + t)
        g = random_graph(n, density, threshold(s, t, k), seed)
        cfg = TilerConfig(alpha=alpha, fallback_n_cap=fallback_n_cap, fallback_budget=budget)
        verdict = tile(g, s, t, cfg).verdict
    else:
        g = construction_for(ConstructionParams(s, t, k)).graph
        verdict = has_factor(g, s, t, budget).verdict
    return {
        "s": s, "t": t, "k": k,
        "instance_kind": kind,
        "seed": "-" if seed is None else seed,
        "min_degree": g.min_degree(),
        "threshold": threshold(s, t, k),
        "verdict": verdict,
        "elapsed_ms": (time.perf_counter() - start) * 1000,
    }


def sweep_jobs(s: int, t: int, ks: List[int], trials: int, seed: int, density: float,
               node_limit: Optional[int], alpha: float, fallback_n_cap: int,
               time_limit: Optional[float] = None) -> List[SweepJob]:
    """
    Jobs in output order: per k, the construction first, then the random trials.
    Each job carries its own node and time limit; time_limit applies per job, not to the sweep.
    """
    rng = random.Random(seed)
    jobs: List[SweepJob] = []
    for k in ks:
        try:
            kind = construction_for(ConstructionParams(s, t, k)).case.value
        except ConstructionError as e:
            logger.warning(f"Skipping construction for k={k}: {e}")
        else:
            jobs.append((s, t, k, kind, None, density, node_limit, time_limit, alpha, fallback_n_cap))
        for _ in range(trials):
            jobs.append((s, t, k, "random", rng.randrange(2 ** 32), density, node_limit, time_limit,
                         alpha, fallback_n_cap))
    return jobs


def cmd_sweep(s: int, t: int, ks: List[int], trials: int, seed: int, density: float = 0.5,
              budget: Optional[SearchBudget] = None, cfg: Optional[TilerConfig] = None,
              workers: int = 1, record_timing: bool = False) -> CommandResult:
    """
    For each k: the lower-bound construction (expected NoFactor) and `trials`
    random graphs with minimum degree at the threshold (expected Found).
    Rows keep job order whatever the worker count.
    """
    if trials < 0:
        raise ValueError(f"trials must be >= 0, got {trials}")
    if s < 1 or t <= s:
        raise ValueError(f"Need 1 <= s < t, got s={s}, t={t}")
    budget = budget or SearchBudget()
    cfg = cfg or TilerConfig()
    jobs = sweep_jobs(s, t, ks, trials, seed, density, budget.node_limit, cfg.alpha, cfg.fallback_n_cap,
                      budget.time_limit)

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_run_sweep_job, jobs))
    else:
        rows = [_run_sweep_job(job) for job in jobs]

    for row in rows:
        logger.info(f"sweep k={row['k']} {row['instance_kind']} seed={row['seed']}: {row['verdict'].value}")
    summary = {}
    for row in rows:
        key = f"{row['instance_kind']}:{row['verdict'].value}"
        summary[key] = summary.get(key, 0) + 1
    report = RunReport(instance={"s": s, "t": t, "k": ks, "trials": trials, "seed": seed},
                       verdict="Done", details={"rows": len(rows), **summary})
    return CommandResult(format_sweep_csv(rows, record_timing), report)


# ----------------------------------------------------------------------
# random / stats
# ----------------------------------------------------------------------

def cmd_random(n: int, density: float, min_degree_floor: int = 0, seed: Optional[int] = None,
               fmt: str = "bge") -> CommandResult:
    g = random_graph(n, density, min_degree_floor, seed)
    report = RunReport(
        instance={"n": n, "density": density, "floor": min_degree_floor, "seed": seed},
        verdict="Built",
        min_degree=_min_degree_or_none(g),
        details={"edges": g.edge_count},
    )
    return CommandResult(format_graph(g, fmt), report)


def graph_stats(g: BipartiteGraph, s: Optional[int] = None, t: Optional[int] = None) -> Dict[str, object]:
    """
    Summary numbers for a graph; thresholds are included when (s, t) fit its order.
    """
    stats: Dict[str, object] = {"n_a": g.n_a, "n_b": g.n_b, "edges": g.edge_count}
    if g.n_a + g.n_b:
        stats["min_degree"] = g.min_degree()
        stats["max_degree"] = g.max_degree()
    if g.n_a and g.n_b:
        stats["density"] = f"{float(g.density(g.side_set(Side.A), g.side_set(Side.B))):.4f}"
    stats["k22_free"] = g.is_k22_free()
    if s is not None and t is not None and g.is_balanced and g.n and g.n % (s + t) == 0:
        k = g.n // (s + t)
        stats["k"] = k
        stats["threshold"] = threshold(s, t, k)
        if g.n % s == 0:
            stats["threshold_kss"] = threshold_kss(s, g.n // s)
    return stats


def cmd_stats(graph_file: Path, s: Optional[int] = None, t: Optional[int] = None) -> CommandResult:
    g = load_graph(graph_file)
    stats = graph_stats(g, s, t)
    report = RunReport(instance={"file": str(graph_file)}, verdict="Done",
                       min_degree=stats.get("min_degree"), threshold=stats.get("threshold"), details=stats)
    return CommandResult(format_stats(stats), report)
