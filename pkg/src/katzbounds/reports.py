"""Run reports and their serialized forms.

JSON output is deterministic: fields keep insertion order and floats are
rendered with 17 significant digits, enough for an exact round-trip
through any conforming parser. CSV output carries the per-node table.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

# Node tables beyond this many rows are truncated unless explicitly
# requested in full.
NODE_ROW_CAP = 10**6

CSV_COLUMNS = ("node_id", "lower", "upper", "rank")


@dataclass
class RunReport:
    """Everything one engine invocation wants to tell the outside world."""

    command: str
    method: str
    parameters: dict[str, Any]
    iterations: int
    wall_time_s: float
    separated_fraction: float | None = None
    ranking_prefix: list[int] = field(default_factory=list)
    nodes: list[dict[str, Any]] | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "command": self.command,
            "method": self.method,
            "parameters": self.parameters,
            "iterations": self.iterations,
            "wall_time_s": self.wall_time_s,
        }
        if self.separated_fraction is not None:
            out["separated_fraction"] = self.separated_fraction
        out["ranking_prefix"] = self.ranking_prefix
        if self.nodes is not None:
            out["nodes"] = self.nodes
        if self.extra:
            out.update(self.extra)
        return out


def node_rows(order, lower, upper, cap: int | None = NODE_ROW_CAP) -> list[dict]:
    """Per-node table rows in rank order, optionally truncated."""
    ids = list(order if cap is None else order[:cap])
    return [{"node_id": int(v), "lower": float(lower[v]),
             "upper": float(upper[v]), "rank": rank + 1}
            for rank, v in enumerate(ids)]


# ---- serialization ----

def dumps_json(value: Any, indent: int = 2) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    text = _encode(value, indent, 0)
    return text + "\n"


def _encode(value: Any, indent: int, depth: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    pad = " " * (indent * (depth + 1))
    close_pad = " " * (indent * depth)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = ",\n".join(
            f"{pad}{json.dumps(str(k))}: {_encode(v, indent, depth + 1)}"
            for k, v in value.items())
        return "{\n" + items + "\n" + close_pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = ",\n".join(
            f"{pad}{_encode(v, indent, depth + 1)}" for v in value)
        return "[\n" + items + "\n" + close_pad + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def format_float(x: float) -> str:
    """17 significant digits; always reads back as the same float."""
    text = format(float(x), ".17g")
    if "." not in text and "e" not in text and "n" not in text:
        text += ".0"
    return text


def dumps_csv(rows: list[dict]) -> str:
    """Per-node CSV with the fixed column set."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(
            format_float(row[c]) if isinstance(row[c], float) else str(row[c])
            for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"
