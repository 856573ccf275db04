"""Incremental maintenance of a converged bounded-Katz state.

Instead of recomputing every walk level after edges change, corrections
are propagated backwards from the endpoints of the changed arcs: if a
node's level-(i-1) weight moved, every in-neighbor's level-i weight moves
by alpha times that delta. The affected set therefore grows by at most
one reverse step per level, which keeps small updates local. When it
stops being local (more than a theta fraction of all nodes), the engine
falls back to recomputing whole levels.

The update runs against the deletion-applied graph; inserted arcs are
accounted for explicitly per level and only joined into the graph at the
end, after bounds are refreshed and previously deactivated nodes that
could now contend again are reactivated.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import (RANKING, TOPK, KatzState, check_converged, iterate_once,
                     tail_gamma)
from .errors import ConvergenceError, ParameterError, ParseError, StateError
from .graph import EdgeBatch, Graph


@dataclass
class UpdateStats:
    """Instrumentation for one batch update."""

    batch_size: int = 0
    seeds: int = 0
    visited: int = 0
    level_sizes: list[int] = field(default_factory=list)
    reactivated: int = 0
    aborted_level: int | None = None
    resumed_iterations: int = 0


@dataclass
class UpdateWorkspace:
    """Scratch carried across the per-level correction passes.

    `affected` is the growing set of nodes whose walk weights may have
    changed; `old_prev` maps nodes to their pre-update weight at the
    previous level (needed because weights are corrected in place).
    """

    affected: set[int]
    targets: set[int]
    theta: float
    old_prev: dict[int, float] = field(default_factory=dict)
    aborted: bool = False
    stats: UpdateStats = field(default_factory=UpdateStats)


def bfs_abort_threshold(state: KatzState, ws: UpdateWorkspace) -> bool:
    """True once the affected set outgrew theta * node_count."""
    return len(ws.affected) > ws.theta * state.n


def update_level(state: KatzState, ws: UpdateWorkspace, g: Graph,
                 batch: EdgeBatch, level: int) -> None:
    """Correct walk level `level` in place after the batch.

    Expects levels 1..level-1 already corrected and g reflecting the
    deletions but not yet the insertions. In local mode each node whose
    previous-level weight changed pushes alpha times its delta to every
    in-neighbor; inserted and deleted arcs contribute their endpoint's
    new (respectively old) previous-level weight directly. Past the
    abort threshold the whole level is recomputed instead.
    """
    alpha = state.alpha
    w_prev = state.levels[level - 1]
    w_cur = state.levels[level]

    if ws.aborted or bfs_abort_threshold(state, ws):
        if not ws.aborted:
            ws.aborted = True
            ws.stats.aborted_level = level
        new = alpha * state._matvec(g, w_prev)
        for s, t in batch.insertions:
            new[s] += alpha * w_prev[t]
        state.katz += new - w_cur
        state.levels[level] = new
        ws.old_prev = {}
        return

    ws.stats.level_sizes.append(len(ws.affected))
    old_cur: dict[int, float] = {}

    # Propagate previous-level deltas one reverse step.
    for v in list(ws.affected):
        old = ws.old_prev.get(v)
        if old is None or old == w_prev[v]:
            continue
        push = alpha * (w_prev[v] - old)
        for w in g.in_neighbors(v):
            ws.affected.add(w)
            if w not in old_cur:
                old_cur[w] = float(w_cur[w])
            w_cur[w] += push

    # Arcs entering the graph contribute their target's corrected weight;
    # arcs that left subtract the weight the target used to have.
    for s, t in batch.insertions:
        if s not in old_cur:
            old_cur[s] = float(w_cur[s])
        w_cur[s] += alpha * w_prev[t]
    for s, t in batch.deletions:
        base = ws.old_prev.get(t)
        if base is None:
            base = float(w_prev[t])
        if s not in old_cur:
            old_cur[s] = float(w_cur[s])
        w_cur[s] -= alpha * base

    # Fold the level deltas into the running partial sums.
    for w, old in old_cur.items():
        state.katz[w] += w_cur[w] - old

    ws.old_prev = old_cur


def update_batch(state: KatzState, g: Graph, batch: EdgeBatch, *,
                 theta: float = 0.5) -> None:
    """Apply an arc batch to g and bring the state back to convergence.

    Validates everything (batch preconditions, post-update admissibility
    of alpha) before touching graph or state, then: deletions, per-level
    corrections, bound refresh under the new tail factor, reactivation of
    nodes that may contend again, insertions, and finally ordinary
    iterations until the stopping rule holds once more. Instrumentation
    lands in state.last_update_stats.
    """
    if not state.params.keep_all_levels:
        raise StateError("dynamic updates need keep_all_levels=True")
    if state.graph_version != g.version:
        raise StateError("state does not belong to this graph revision")
    if state.r < 1:
        raise StateError("run the static engine before applying updates")
    if not 0.0 <= theta <= 1.0:
        raise ParameterError(f"theta must be in [0, 1], got {theta}")
    g.validate_batch(batch)
    if state.undirected and not batch.is_symmetric():
        raise ParameterError(
            "state is in undirected mode; batch must contain both "
            "directions of every edge")

    # Admission check on the post-update degrees, before any mutation.
    degs = g.out_degrees()
    for s, _ in batch.deletions:
        degs[s] -= 1
    for s, _ in batch.insertions:
        degs[s] += 1
    new_max = int(degs.max()) if state.n else 0
    if new_max > 0 and state.alpha >= 1.0 / new_max:
        raise ParameterError(
            f"batch raises max out-degree to {new_max}; alpha={state.alpha} "
            f"would leave the walk series divergent")

    stats = UpdateStats(batch_size=len(batch))
    seeds = {s for s, _ in batch.insertions} | {s for s, _ in batch.deletions}
    targets = {t for _, t in batch.insertions} | {t for _, t in batch.deletions}
    stats.seeds = len(seeds)
    ws = UpdateWorkspace(affected=set(seeds), targets=targets, theta=theta,
                         stats=stats)

    g.remove_arcs(batch.deletions)
    state.graph_version = g.version
    state._chunk_cache = None

    for level in range(1, state.r + 1):
        update_level(state, ws, g, batch, level)
    stats.visited = len(ws.affected | ws.targets)

    # Refresh bounds everywhere under the post-update tail factor. Values
    # of untouched nodes are reproduced bit for bit, so this equals the
    # touched-only refresh whenever the factor is unchanged.
    state.set_gamma(tail_gamma(state.alpha, new_max))
    tail = state.alpha * state.levels[state.r]
    if state.undirected:
        state.lower = state.katz + tail
    else:
        state.lower = state.katz.copy()
    state.upper = state.katz + tail * state.gamma

    # Nodes written off earlier may contend again after the update.
    if state.criterion.kind in (RANKING, TOPK) and state.active.size < state.n:
        floor = float(np.min(state.lower[state.active])) - state.epsilon
        inactive = np.setdiff1d(np.arange(state.n, dtype=np.int64),
                                state.active, assume_unique=False)
        back = inactive[state.upper[inactive] >= floor]
        if back.size:
            state.active = np.concatenate([state.active, back])
            stats.reactivated = int(back.size)

    g.insert_arcs(batch.insertions)
    state.graph_version = g.version
    state._chunk_cache = None

    while not check_converged(state):
        if state.r >= state.max_iterations:
            state.last_update_stats = stats
            raise ConvergenceError(
                f"stopping rule unmet after resuming to {state.r} iterations",
                iterations=state.r, gap=state.gap())
        iterate_once(state, g)
        stats.resumed_iterations += 1
    state.last_update_stats = stats


# ---- batch file format ----

def load_batches(source) -> list[EdgeBatch]:
    """Parse a batch file: lines "+ u v" or "- u v", batches separated by
    blank lines. Returns the batches in file order; an empty file yields
    none.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r") as fh:
            return load_batches(fh)

    batches: list[EdgeBatch] = []
    ins: list[tuple[int, int]] = []
    dels: list[tuple[int, int]] = []

    def flush():
        nonlocal ins, dels
        if ins or dels:
            batches.append(EdgeBatch(insertions=ins, deletions=dels))
            ins, dels = [], []

    for lineno, raw in enumerate(source, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line:
            flush()
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("+", "-"):
            raise ParseError(
                f"expected '+ u v' or '- u v', got {line!r}", lineno)
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(f"non-integer node id in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise ParseError(f"negative node id in {line!r}", lineno)
        (ins if parts[0] == "+" else dels).append((u, v))
    flush()
    return batches
