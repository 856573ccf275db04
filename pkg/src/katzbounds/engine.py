"""Katz centrality with certified per-node lower/upper bounds.

The walk series katz(v) = sum_i alpha^i * (number of length-i walks from v)
is accumulated one level at a time in attenuated form: level r stores
alpha^r times the walk count, so values stay bounded for any admissible
attenuation factor. After each level the partial sum gives a lower bound
and a geometric tail estimate gives an upper bound; iteration stops as
soon as the requested stopping rule holds on those bounds, which is
usually long before the scores themselves have converged.

Bounds only tighten as levels are added: lower bounds never decrease and
upper bounds never increase, which is what makes early termination and
permanent deactivation of settled nodes sound.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError, ParameterError, StateError
from .graph import Graph

DEFAULT_EPSILON = 1e-6

RANKING = "ranking"
TOPK = "topk"
SCORE = "score"
PAIR = "pair"


# ---- stopping criteria ----

@dataclass(frozen=True)
class Criterion:
    """A stopping rule: what has to be epsilon-separated before we stop.

    ranking  every adjacent pair in the full ranking
    topk     the k best among themselves and against everyone else
    score    every node's own bound interval narrower than epsilon
    pair     one specific pair of nodes
    """

    kind: str
    epsilon: float = DEFAULT_EPSILON
    k: int | None = None
    u: int | None = None
    v: int | None = None

    def __post_init__(self):
        if self.kind not in (RANKING, TOPK, SCORE, PAIR):
            raise ParameterError(f"unknown criterion kind {self.kind!r}")
        if not (isinstance(self.epsilon, (int, float)) and
                math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ParameterError(f"epsilon must be finite and > 0, got {self.epsilon}")
        if self.kind == TOPK:
            if self.k is None or int(self.k) < 1:
                raise ParameterError("topk criterion needs k >= 1")
        if self.kind == PAIR:
            if self.u is None or self.v is None:
                raise ParameterError("pair criterion needs two node ids")
            if self.u == self.v:
                raise ParameterError("pair criterion needs two distinct nodes")
            if self.u < 0 or self.v < 0:
                raise ParameterError("pair node ids must be non-negative")

    @classmethod
    def ranking(cls, epsilon: float = DEFAULT_EPSILON) -> "Criterion":
        return cls(RANKING, epsilon)

    @classmethod
    def top_k(cls, k: int, epsilon: float = DEFAULT_EPSILON) -> "Criterion":
        return cls(TOPK, epsilon, k=int(k))

    @classmethod
    def score(cls, epsilon: float = DEFAULT_EPSILON) -> "Criterion":
        return cls(SCORE, epsilon)

    @classmethod
    def pair(cls, u: int, v: int, epsilon: float = DEFAULT_EPSILON) -> "Criterion":
        return cls(PAIR, epsilon, u=int(u), v=int(v))


@dataclass(frozen=True)
class Params:
    """Engine parameters fixed at init (gamma tracks the current graph)."""

    alpha: float
    epsilon: float
    gamma: float
    keep_all_levels: bool = True


def default_alpha(g: Graph) -> float:
    """1 / (1 + max out-degree); 0.5 on an edgeless graph."""
    d = g.max_out_degree()
    return 1.0 / (1.0 + d) if d > 0 else 0.5


def validate_alpha(alpha: float, max_out_degree: int) -> None:
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha)):
        raise ParameterError(f"alpha must be a finite number, got {alpha!r}")
    if alpha <= 0.0:
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    if max_out_degree > 0:
        if alpha >= 1.0 / max_out_degree:
            raise ParameterError(
                f"alpha={alpha} is not below 1/max_out_degree = "
                f"1/{max_out_degree}; the walk series may diverge")
    elif alpha >= 1.0:
        raise ParameterError(f"alpha must be < 1, got {alpha}")


def tail_gamma(alpha: float, max_out_degree: int) -> float:
    """Geometric tail factor: deg_max / (1 - alpha * deg_max); 0 if edgeless."""
    d = max_out_degree
    return d / (1.0 - alpha * d) if d > 0 else 0.0


# ---- engine state ----

class KatzState:
    """Mutable state of one bounded-Katz computation.

    levels[i] holds alpha^i * walk_count_i per node (levels[0] is all
    ones), katz the partial sum of levels 1..r, and lower/upper the
    current certified bounds. `active` is the ordered id array of nodes
    still contending for the requested ranking; it only ever shrinks
    during a static run.
    """

    __slots__ = ("n", "params", "criterion", "undirected", "r", "levels",
                 "katz", "lower", "upper", "active", "graph_version",
                 "threads", "max_iterations", "last_update_stats",
                 "_chunk_cache")

    def __init__(self, n: int, params: Params, criterion: Criterion,
                 undirected: bool, graph_version: int, threads: int,
                 max_iterations: int):
        self.n = n
        self.params = params
        self.criterion = criterion
        self.undirected = undirected
        self.r = 0
        self.levels: list[np.ndarray] = [np.ones(n, dtype=np.float64)]
        self.katz = np.zeros(n, dtype=np.float64)
        self.lower = np.zeros(n, dtype=np.float64)
        # Tail bound already valid at r=0: remaining series <= alpha*gamma.
        self.upper = np.full(n, params.alpha * params.gamma, dtype=np.float64)
        self.active = np.arange(n, dtype=np.int64)
        self.graph_version = graph_version
        self.threads = threads
        self.max_iterations = max_iterations
        self.last_update_stats = None
        self._chunk_cache = None

    # convenience
    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def gamma(self) -> float:
        return self.params.gamma

    @property
    def epsilon(self) -> float:
        return self.criterion.epsilon

    def gap(self) -> float:
        """Widest remaining bound interval."""
        return float(np.max(self.upper - self.lower)) if self.n else 0.0

    def set_gamma(self, gamma: float) -> None:
        self.params = replace(self.params, gamma=gamma)

    # ---- parallel matvec ----

    def _matvec(self, g: Graph, vec: np.ndarray) -> np.ndarray:
        """out[v] = sum of vec[u] over out-neighbors u of v.

        With threads > 1 the rows are split into contiguous chunks and
        each chunk is computed independently; per-row summation order is
        identical to the sequential path, so results are bitwise equal
        for every thread count.
        """
        A = g.out_csr()
        t = self.threads
        if t <= 1 or self.n < 2 * t:
            return A @ vec
        cache = self._chunk_cache
        if cache is None or cache[0] != g.version or cache[1] != t:
            bounds = np.linspace(0, self.n, t + 1, dtype=np.int64)
            chunks = [(int(bounds[i]), int(bounds[i + 1]),
                       A[int(bounds[i]):int(bounds[i + 1])])
                      for i in range(t)]
            cache = (g.version, t, chunks)
            self._chunk_cache = cache
        out = np.empty(self.n, dtype=np.float64)

        def _run_chunk(i: int) -> None:
            lo, hi, sub = cache[2][i]
            out[lo:hi] = sub @ vec

        list(_shared_executor(t).map(_run_chunk, range(t)))
        return out


_EXECUTORS: dict[int, ThreadPoolExecutor] = {}


def _shared_executor(threads: int) -> ThreadPoolExecutor:
    ex = _EXECUTORS.get(threads)
    if ex is None:
        ex = ThreadPoolExecutor(max_workers=threads)
        _EXECUTORS[threads] = ex
    return ex


# ---- results ----

@dataclass(frozen=True)
class RankingResult:
    """Immutable outcome of a converged run.

    `order` lists all node ids by descending lower bound (ties by
    ascending id); `lower`/`upper` are indexed by node id.
    """

    order: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    iterations_used: int
    criterion: Criterion
    separated_fraction: float

    def bounds(self, v: int) -> tuple[float, float]:
        return float(self.lower[v]), float(self.upper[v])

    def top(self, k: int) -> list[int]:
        return [int(v) for v in self.order[:k]]


# ---- operations ----

def init(g: Graph, criterion: Criterion, *, alpha: float | None = None,
         undirected: bool = False, keep_all_levels: bool = True,
         threads: int = 1, max_iterations: int | None = None) -> KatzState:
    """Prepare a computation on g; alpha defaults to 1/(1 + max degree).

    Raises ParameterError for an empty graph, an attenuation factor at or
    above the divergence threshold, a criterion that does not fit the
    graph, or undirected mode on an asymmetric arc set.
    """
    n = g.node_count
    if n < 1:
        raise ParameterError("graph must have at least one node")
    if alpha is None:
        alpha = default_alpha(g)
    alpha = float(alpha)
    d = g.max_out_degree()
    validate_alpha(alpha, d)
    if criterion.kind == TOPK and criterion.k > n:
        raise ParameterError(
            f"topk k={criterion.k} exceeds node count {n}")
    if criterion.kind == PAIR and (criterion.u >= n or criterion.v >= n):
        raise ParameterError("pair criterion names a node outside the graph")
    if undirected and not g.is_symmetric():
        raise ParameterError(
            "undirected mode requires a symmetric arc set")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    gamma = tail_gamma(alpha, d)
    if max_iterations is None:
        max_iterations = default_iteration_cap(alpha, d, criterion.epsilon)
    elif max_iterations < 1:
        raise ParameterError("max_iterations must be >= 1")
    params = Params(alpha=alpha, epsilon=criterion.epsilon, gamma=gamma,
                    keep_all_levels=keep_all_levels)
    return KatzState(n, params, criterion, undirected, g.version,
                     int(threads), int(max_iterations))


def default_iteration_cap(alpha: float, max_out_degree: int,
                          epsilon: float) -> int:
    """10 * ceil(log(1/eps) / log(1/(alpha*deg_max))), floored at 1."""
    rho = alpha * max_out_degree
    if rho <= 0.0:
        return 64
    cap = 10 * math.ceil(math.log(1.0 / epsilon) / math.log(1.0 / rho))
    return max(1, cap)


def iterate_once(state: KatzState, g: Graph) -> None:
    """Advance one walk level and refresh bounds for every node.

    All nodes are advanced whether active or not; deactivation only
    affects which nodes the stopping rule still looks at.
    """
    if g.version != state.graph_version:
        raise StateError(
            "graph changed since init; static iteration would be unsound")
    alpha = state.alpha
    w_new = alpha * state._matvec(g, state.levels[-1])
    state.r += 1
    state.katz += w_new
    tail = alpha * w_new
    if state.undirected:
        # Every walk of length r extends by retracing its last edge, so
        # the next term is at least alpha * current level.
        state.lower = state.katz + tail
    else:
        state.lower = state.katz.copy()
    state.upper = state.katz + tail * state.gamma
    state.levels.append(w_new)
    if not state.params.keep_all_levels and len(state.levels) > 2:
        del state.levels[0]


def epsilon_separated(state: KatzState, w: int, v: int) -> bool:
    """True when w's lower bound strictly clears v's upper bound minus eps.

    Callers normally pass (w, v) with lower(w) >= lower(v).
    """
    for x in (w, v):
        if not 0 <= x < state.n:
            raise ParameterError(f"node id {x} outside graph")
    return bool(state.lower[w] > state.upper[v] - state.epsilon)


def check_converged(state: KatzState) -> bool:
    """Evaluate the stopping rule; may permanently deactivate nodes.

    For the ranking/topk rules the active set is partially sorted by
    descending lower bound, nodes provably outside the top k are dropped
    and the surviving prefix is tested for pairwise separation.
    """
    if state.r < 1:
        raise StateError("check_converged needs at least one iteration")
    kind = state.criterion.kind
    eps = state.epsilon
    if kind == SCORE:
        return bool(np.max(state.upper - state.lower) < eps)
    if kind == PAIR:
        u, v = state.criterion.u, state.criterion.v
        lu, lv = state.lower[u], state.lower[v]
        if (lu, -u) >= (lv, -v):
            w, x = u, v
        else:
            w, x = v, u
        return epsilon_separated(state, w, x)

    k = state.n if kind == RANKING else state.criterion.k
    m = state.active
    lowers = state.lower[m]
    if m.size > k:
        sel = np.argpartition(-lowers, k - 1)
        top_pos, rest_pos = sel[:k], sel[k:]
    else:
        top_pos = np.arange(m.size)
        rest_pos = np.empty(0, dtype=np.int64)
    top_ids = m[top_pos]
    order = np.lexsort((top_ids, -state.lower[top_ids]))
    prefix = top_ids[order]
    threshold = state.lower[prefix[-1]]
    if rest_pos.size:
        rest = m[rest_pos]
        surviving = rest[state.upper[rest] - eps >= threshold]
        state.active = np.concatenate([prefix, surviving])
    else:
        state.active = prefix
    if state.active.size > k:
        return False
    if prefix.size >= 2:
        seps = state.upper[prefix[1:]] - eps < state.lower[prefix[:-1]]
        return bool(seps.all())
    return True


def run(state: KatzState, g: Graph) -> RankingResult:
    """Iterate until the stopping rule holds; error out at the cap.

    Always performs at least one iteration so bounds are meaningful.
    """
    while True:
        iterate_once(state, g)
        if check_converged(state):
            break
        if state.r >= state.max_iterations:
            raise ConvergenceError(
                f"stopping rule still unmet after {state.r} iterations "
                f"(widest bound interval {state.gap():.3e})",
                iterations=state.r, gap=state.gap())
    return ranking_result(state)


def ranking_result(state: KatzState) -> RankingResult:
    """Snapshot the current bounds into an immutable ranking."""
    order = np.lexsort((np.arange(state.n), -state.lower))
    lower = state.lower.copy()
    upper = state.upper.copy()
    for arr in (order, lower, upper):
        arr.setflags(write=False)
    return RankingResult(order=order, lower=lower, upper=upper,
                         iterations_used=state.r, criterion=state.criterion,
                         separated_fraction=separated_fraction(state))


def separated_fraction(state: KatzState) -> float:
    """Fraction of unordered node pairs already strictly separated.

    A pair counts once its lower bound on one side strictly exceeds the
    other side's upper bound (no epsilon relaxation). Sorting makes this
    O(n log n). Returns 1.0 for graphs with fewer than two nodes.
    """
    if state.r < 1:
        raise StateError("separated_fraction needs at least one iteration")
    n = state.n
    if n < 2:
        return 1.0
    sorted_lower = np.sort(state.lower)
    # For each node, count lower bounds strictly above its upper bound.
    above = n - np.searchsorted(sorted_lower, state.upper, side="right")
    total = int(above.sum())
    return total / (n * (n - 1) // 2)
