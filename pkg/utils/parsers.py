"""
Parsing utilities for graph, sidecar and factor files.
Graph files come in the line-oriented bge text format or as JSON.
"""

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from core.bigraph import BipartiteGraph, Side, VertexSet
from core.errors import GraphError, ParseError
from core.solver import Factor, KstCopy

HEADER_RE = re.compile(r'^bge\s+(\d+)\s+(\d+)\s+(\d+)$')
EDGE_RE = re.compile(r'^e\s+(\d+)\s+(\d+)$')


@dataclass
class Sidecar:
    """Block labels written next to a constructed graph."""

    case: str
    params: Dict[str, int]
    blocks: Dict[str, VertexSet]
    claimed_min_degree: Optional[int] = None


def detect_format(text: str) -> str:
    """'json' when the first non-blank character opens an object, else 'bge'."""
    return "json" if text.lstrip().startswith("{") else "bge"


def parse_bge(text: str) -> BipartiteGraph:
    """
    Parse the bge text format.

    Example:
        bge 2 2 3
        e 0 0
        e 0 1
        e 1 1

    Blank lines and lines starting with '#' are ignored.

    Args:
        text: File contents

    Returns:
        The graph

    Raises:
        ParseError: malformed header or edge line, index out of range,
            duplicate edge, or edge count not matching the header
    """
    header = None
    edges: List[Tuple[int, int]] = []
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            match = HEADER_RE.match(line)
            if not match:
                raise ParseError(f"expected header 'bge <n_a> <n_b> <m>', got {line!r}", line_no)
            header = tuple(int(x) for x in match.groups())
            continue
        match = EDGE_RE.match(line)
        if not match:
            raise ParseError(f"expected edge 'e <a> <b>', got {line!r}", line_no)
        a, b = int(match.group(1)), int(match.group(2))
        if a >= header[0] or b >= header[1]:
            raise ParseError(f"edge ({a}, {b}) out of range for {header[0]}x{header[1]}", line_no)
        if (a, b) in seen:
            raise ParseError(f"duplicate edge ({a}, {b})", line_no)
        seen.add((a, b))
        edges.append((a, b))

    if header is None:
        raise ParseError("empty graph file", 1)
    n_a, n_b, m = header
    if len(edges) != m:
        raise ParseError(f"header announces {m} edges, found {len(edges)}")
    return BipartiteGraph.from_edges(n_a, n_b, edges)


def _load_json(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno) from e
    if not isinstance(data, dict):
        raise ParseError("expected a JSON object", 1)
    return data


def _int_field(data: dict, key: str) -> int:
    value = data.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ParseError(f"field {key!r} must be a non-negative integer, got {value!r}")
    return value


def parse_graph_json(text: str) -> BipartiteGraph:
    """Parse {"n_a": .., "n_b": .., "edges": [[a, b], ...]}."""
    data = _load_json(text)
    n_a, n_b = _int_field(data, "n_a"), _int_field(data, "n_b")
    raw_edges = data.get("edges")
    if not isinstance(raw_edges, list):
        raise ParseError("field 'edges' must be a list")
    edges = []
    for pair in raw_edges:
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, int) for x in pair)):
            raise ParseError(f"malformed edge {pair!r}")
        edges.append((pair[0], pair[1]))
    if len(set(edges)) != len(edges):
        raise ParseError("duplicate edges")
    if "m" in data and data["m"] != len(edges):
        raise ParseError(f"field 'm' announces {data['m']} edges, found {len(edges)}")
    try:
        return BipartiteGraph.from_edges(n_a, n_b, edges)
    except GraphError as e:
        raise ParseError(str(e)) from e


def parse_graph(text: str, fmt: Optional[str] = None) -> BipartiteGraph:
    """Parse either format; detected from the contents unless fmt is given."""
    fmt = fmt or detect_format(text)
    if fmt == "json":
        return parse_graph_json(text)
    if fmt == "bge":
        return parse_bge(text)
    raise ParseError(f"unknown graph format {fmt!r}")


def load_graph(path: Path) -> BipartiteGraph:
    return parse_graph(Path(path).read_text())


def _vertex_set(raw: object, where: str) -> VertexSet:
    if not isinstance(raw, dict) or raw.get("side") not in ("A", "B") or not isinstance(raw.get("members"), list):
        raise ParseError(f"{where}: expected {{'side': 'A'|'B', 'members': [...]}}")
    if not all(isinstance(i, int) and i >= 0 for i in raw["members"]):
        raise ParseError(f"{where}: members must be non-negative integers")
    return VertexSet.of(Side(raw["side"]), raw["members"])


def parse_sidecar(text: str) -> Sidecar:
    """
    Parse a construction sidecar.

    Example:
        {"case": "even", "params": {"s": 1, "t": 2, "k": 2},
         "claimed_min_degree": 2,
         "blocks": {"A1": {"side": "A", "members": [0, 1, 2, 3]}, ...}}
    """
    data = _load_json(text)
    case = data.get("case")
    if not isinstance(case, str):
        raise ParseError("field 'case' must be a string")
    params = data.get("params", {})
    if not isinstance(params, dict) or not all(isinstance(v, int) for v in params.values()):
        raise ParseError("field 'params' must map names to integers")
    raw_blocks = data.get("blocks", {})
    if not isinstance(raw_blocks, dict):
        raise ParseError("field 'blocks' must be an object")
    blocks = {name: _vertex_set(raw, f"block {name}") for name, raw in raw_blocks.items()}
    claimed = data.get("claimed_min_degree")
    if claimed is not None and not isinstance(claimed, int):
        raise ParseError("field 'claimed_min_degree' must be an integer")
    return Sidecar(case, dict(params), blocks, claimed)


def parse_factor(text: str) -> Tuple[int, int, Factor]:
    """
    Parse a factor file.

    Returns:
        (s, t, factor)
    """
    data = _load_json(text)
    s, t = _int_field(data, "s"), _int_field(data, "t")
    raw_copies = data.get("copies")
    if not isinstance(raw_copies, list):
        raise ParseError("field 'copies' must be a list")
    copies = []
    for i, raw in enumerate(raw_copies):
        if not isinstance(raw, dict):
            raise ParseError(f"copy {i} must be an object")
        s_side = _vertex_set(raw.get("s_side"), f"copy {i} s_side")
        t_side = _vertex_set(raw.get("t_side"), f"copy {i} t_side")
        try:
            copies.append(KstCopy(s_side, t_side))
        except GraphError as e:
            raise ParseError(f"copy {i}: {e}") from e
    return s, t, Factor(copies)
