"""
Formatting utilities for graph files, run reports and sweep tables.
Every serializer writes vertices and edges in sorted order so output is diffable.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from core.bigraph import BipartiteGraph, VertexSet
from core.extremal import LabeledConstruction
from core.solver import Factor, Verdict

SWEEP_COLUMNS = ["s", "t", "k", "instance_kind", "seed", "min_degree", "threshold", "verdict", "elapsed_ms"]


def format_bge(g: BipartiteGraph) -> str:
    """
    Serialize to the bge text format.

    Example:
        bge 2 2 1
        e 0 1
    """
    lines = [f"bge {g.n_a} {g.n_b} {g.edge_count}"]
    lines.extend(f"e {a} {b}" for a, b in g.edges())
    return "\n".join(lines) + "\n"


def format_graph_json(g: BipartiteGraph) -> str:
    data = {"n_a": g.n_a, "n_b": g.n_b, "m": g.edge_count, "edges": [[a, b] for a, b in g.edges()]}
    return json.dumps(data) + "\n"


def format_graph(g: BipartiteGraph, fmt: str = "bge") -> str:
    if fmt == "json":
        return format_graph_json(g)
    if fmt == "bge":
        return format_bge(g)
    raise ValueError(f"Unknown graph format {fmt!r}")


def _vertex_set(vs: VertexSet) -> dict:
    return {"side": vs.side.value, "members": vs.sorted}


def format_sidecar(case: str, params: Dict[str, int], blocks: Dict[str, VertexSet],
                   claimed_min_degree: Optional[int] = None) -> str:
    data = {
        "case": case,
        "params": params,
        "claimed_min_degree": claimed_min_degree,
        "blocks": {name: _vertex_set(vs) for name, vs in sorted(blocks.items())},
    }
    return json.dumps(data, indent=2) + "\n"


def format_construction_sidecar(c: LabeledConstruction) -> str:
    params = {"s": c.params.s, "t": c.params.t, "k": c.params.k}
    return format_sidecar(c.case.value, params, c.blocks, c.claimed_min_degree)


def format_factor(s: int, t: int, factor: Factor) -> str:
    """Copies are listed in the order the solver or tiler produced them."""
    data = {
        "s": s,
        "t": t,
        "copies": [{"s_side": _vertex_set(c.s_side), "t_side": _vertex_set(c.t_side)} for c in factor.copies],
    }
    return json.dumps(data) + "\n"


@dataclass
class RunReport:
    instance: Dict[str, object]
    verdict: str
    min_degree: Optional[int] = None
    threshold: Optional[int] = None
    elapsed_ms: Optional[float] = None
    details: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "verdict": self.verdict,
            "min_degree": self.min_degree,
            "threshold": self.threshold,
            "elapsed_ms": None if self.elapsed_ms is None else round(self.elapsed_ms, 3),
            "details": self.details,
        }


def format_report(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, default=str) + "\n"


def factor_summary(factor: Optional[Factor]) -> Dict[str, int]:
    if factor is None:
        return {}
    by_orientation: Dict[str, int] = {}
    for copy in factor.copies:
        by_orientation[copy.orientation.value] = by_orientation.get(copy.orientation.value, 0) + 1
    return {"copies": len(factor.copies), **dict(sorted(by_orientation.items()))}


def format_sweep_row(row: Dict[str, object], record_timing: bool = False) -> Dict[str, str]:
    """Render one row; elapsed_ms becomes '-' unless timing is recorded."""
    out = {column: str(row.get(column, "")) for column in SWEEP_COLUMNS}
    verdict = row.get("verdict")
    if isinstance(verdict, Verdict):
        out["verdict"] = verdict.value
    elapsed = row.get("elapsed_ms")
    out["elapsed_ms"] = f"{elapsed:.1f}" if record_timing and elapsed is not None else "-"
    return out


def format_sweep_csv(rows: Iterable[Dict[str, object]], record_timing: bool = False) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(format_sweep_row(row, record_timing))
    return buffer.getvalue()


def format_stats(stats: Dict[str, object]) -> str:
    """
    Aligned key: value lines.

    Example:
        n           : 6
        edges       : 12
    """
    if not stats:
        return ""
    width = max(len(key) for key in stats)
    lines: List[str] = [f"{key.ljust(width)} : {value}" for key, value in stats.items()]
    return "\n".join(lines) + "\n"
