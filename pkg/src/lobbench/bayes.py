"""Bayesian correlated t-test over per-fold metric differences, and tiered rankings.

For a pair (A, B) the differences are ``metric_B - metric_A`` per fold, so
posterior mass left of the rope means A scores higher and mass right of it
means B does.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

ROPE = 0.03
THRESHOLD = 0.95
COMPARED_METRICS = ("mcc", "weighted_f1")

A_BETTER = "A_better"
EQUIVALENT = "equivalent"
B_BETTER = "B_better"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class PairedDiffs:
    model_a: str
    model_b: str
    metric: str
    diffs: tuple[float, ...]
    rho: float | None = None

    def __post_init__(self):
        if len(self.diffs) < 2:
            raise ValueError("need at least two folds for a posterior")
        if not all(math.isfinite(d) for d in self.diffs):
            raise ValueError("differences must be finite")
        if self.rho is not None and not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")

    @classmethod
    def from_scores(cls, model_a: str, scores_a: Sequence[float], model_b: str, scores_b: Sequence[float],
                    metric: str, rho: float | None = None) -> "PairedDiffs":
        if len(scores_a) != len(scores_b):
            raise ValueError("fold counts differ between models")
        diffs = tuple(float(b) - float(a) for a, b in zip(scores_a, scores_b))
        return cls(model_a, model_b, metric, diffs, rho)

    def swapped(self) -> "PairedDiffs":
        return PairedDiffs(self.model_b, self.model_a, self.metric, tuple(-d for d in self.diffs), self.rho)


@dataclass(frozen=True)
class Posterior:
    """Student-t over the mean difference; ``scale == 0`` is a point mass at ``location``."""

    location: float
    scale: float
    dof: int
    rho: float

    def cdf(self, x: float) -> float:
        if self.scale == 0:
            return 1.0 if x >= self.location else 0.0
        return float(stats.t.cdf((x - self.location) / self.scale, self.dof))


@dataclass(frozen=True)
class PosteriorDecision:
    model_a: str
    model_b: str
    metric: str
    location: float
    scale: float
    dof: int
    rho: float
    rope: float
    p_left: float
    p_rope: float
    p_right: float
    verdict: str
    lean: str

    def to_dict(self) -> dict:
        return asdict(self)


def posterior(diffs: PairedDiffs) -> Posterior:
    x = np.asarray(diffs.diffs, dtype=np.float64)
    k = x.size
    if k < 2:
        raise ValueError("need at least two folds for a posterior")
    rho = (1.0 / k) if diffs.rho is None else diffs.rho
    loc = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    scale = sd * math.sqrt(1.0 / k + rho / (1.0 - rho))
    return Posterior(loc, scale, k - 1, rho)


def rope_probabilities(post: Posterior, rope: float = ROPE) -> tuple[float, float, float]:
    """(P(diff < -rope), P(|diff| <= rope), P(diff > rope))."""
    if rope < 0:
        raise ValueError("rope half-width must be non-negative")
    if post.scale == 0:
        if post.location < -rope:
            return 1.0, 0.0, 0.0
        if post.location > rope:
            return 0.0, 0.0, 1.0
        return 0.0, 1.0, 0.0
    if math.isinf(rope):
        return 0.0, 1.0, 0.0
    # both tails use the lower CDF so that negating the location swaps them bit for bit
    p_left = float(stats.t.cdf((-rope - post.location) / post.scale, post.dof))
    p_right = float(stats.t.cdf((post.location - rope) / post.scale, post.dof))
    p_rope = max(1.0 - (p_left + p_right), 0.0)
    return p_left, p_rope, p_right


def verdict(triple: tuple[float, float, float], threshold: float = THRESHOLD) -> tuple[str, str]:
    """(verdict, lean). The region with mass above ``threshold`` wins; otherwise the
    verdict is undecided and ``lean`` names the heaviest region (ties go to equivalent)."""
    p_left, p_rope, p_right = triple
    labels = (A_BETTER, EQUIVALENT, B_BETTER)
    top = max(triple)
    lean = EQUIVALENT if p_rope == top else labels[int(np.argmax(triple))]
    if top > threshold:
        return lean, lean
    return UNDECIDED, lean


def compare(diffs: PairedDiffs, rope: float = ROPE, threshold: float = THRESHOLD) -> PosteriorDecision:
    post = posterior(diffs)
    triple = rope_probabilities(post, rope)
    v, lean = verdict(triple, threshold)
    return PosteriorDecision(diffs.model_a, diffs.model_b, diffs.metric, post.location, post.scale, post.dof,
                             post.rho, rope, *triple, v, lean)


# -- ranking -----------------------------------------------------------------

@dataclass
class Ranking:
    tiers: list[list[str]]
    intersections: list[dict] = field(default_factory=list)

    def tier_of(self, model: str) -> list[int]:
        """Tier indices occupied by ``model`` (several when it sits at an intersection)."""
        for i, tier in enumerate(self.tiers):
            if model in tier:
                return [i]
        for item in self.intersections:
            if item["model"] == model:
                return list(item["tiers"])
        raise KeyError(model)

    def to_dict(self) -> dict:
        return {"tiers": self.tiers, "intersections": self.intersections}


def _components(nodes: list[str], edges: dict[str, set[str]]) -> list[list[str]]:
    seen: set[str] = set()
    comps = []
    for n in nodes:
        if n in seen:
            continue
        comp, queue = [], deque([n])
        seen.add(n)
        while queue:
            cur = queue.popleft()
            comp.append(cur)
            for nb in sorted(edges[cur]):
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        comps.append(sorted(comp))
    return sorted(comps)


def _shortest_path(src: str, dst: str, edges: dict[str, set[str]]) -> list[str]:
    prev = {src: None}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        if cur == dst:
            break
        for nb in sorted(edges[cur]):
            if nb not in prev:
                prev[nb] = cur
                queue.append(nb)
    path = [dst]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def _sccs(n: int, succ: dict[int, set[int]]) -> list[list[int]]:
    index, low, on_stack, stack, out = {}, {}, set(), [], []
    counter = [0]

    def visit(v):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in sorted(succ[v]):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(sorted(comp))

    for v in range(n):
        if v not in index:
            visit(v)
    return out


def build_ranking(decisions: Iterable[PosteriorDecision | tuple[str, str, str]]) -> Ranking:
    """Order models into tiers from pairwise verdicts.

    Equivalent pairs link models into groups; groups are layered by the longest
    chain of dominance above them. A model whose equivalences bridge two models
    that dominate one another, or that sits in a dominance cycle, is lifted out
    of the groups and reported as an intersection spanning the tiers it touches.
    Undecided verdicts contribute no relation.
    """
    eq: dict[str, set[str]] = {}
    dom: set[tuple[str, str]] = set()
    models: set[str] = set()
    for d in decisions:
        a, b, v = (d.model_a, d.model_b, d.verdict) if isinstance(d, PosteriorDecision) else d
        models.update((a, b))
        eq.setdefault(a, set())
        eq.setdefault(b, set())
        if v == EQUIVALENT:
            eq[a].add(b)
            eq[b].add(a)
        elif v == A_BETTER:
            dom.add((a, b))
        elif v == B_BETTER:
            dom.add((b, a))
    names = sorted(models)
    flagged: dict[str, str] = {}

    while True:
        live = [n for n in names if n not in flagged]
        live_eq = {n: {m for m in eq[n] if m not in flagged} for n in live}
        conflict = None
        for comp in _components(live, live_eq):
            members = set(comp)
            for w, l in sorted(dom):
                if w in members and l in members:
                    conflict = (w, l)
                    break
            if conflict:
                break
        if conflict is None:
            break
        w, l = conflict
        for node in _shortest_path(w, l, live_eq)[1:-1]:
            flagged[node] = f"equivalent to both {w} and {l}, which are not equivalent"

    live = [n for n in names if n not in flagged]
    groups = _components(live, {n: {m for m in eq[n] if m not in flagged} for n in live})
    where = {m: gi for gi, g in enumerate(groups) for m in g}
    succ: dict[int, set[int]] = {i: set() for i in range(len(groups))}
    for w, l in dom:
        if w in where and l in where and where[w] != where[l]:
            succ[where[w]].add(where[l])

    # collapse dominance cycles; their members are flagged but keep a shared tier
    merged = _sccs(len(groups), succ)
    owner = {gi: ci for ci, comp in enumerate(merged) for gi in comp}
    blocks = [sorted(m for gi in comp for m in groups[gi]) for comp in merged]
    for comp, members in zip(merged, blocks):
        if len(comp) > 1:
            for m in members:
                flagged[m] = "member of a dominance cycle"
    bsucc: dict[int, set[int]] = {i: set() for i in range(len(blocks))}
    for gi, outs in succ.items():
        for gj in outs:
            if owner[gi] != owner[gj]:
                bsucc[owner[gi]].add(owner[gj])

    level = {i: 0 for i in range(len(blocks))}
    preds: dict[int, set[int]] = {i: set() for i in range(len(blocks))}
    for i, outs in bsucc.items():
        for j in outs:
            preds[j].add(i)
    order, indeg = [], {i: len(preds[i]) for i in preds}
    ready = deque(sorted(i for i, d in indeg.items() if d == 0))
    while ready:
        i = ready.popleft()
        order.append(i)
        for j in sorted(bsucc[i]):
            level[j] = max(level[j], level[i] + 1)
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    n_tiers = max(level.values()) + 1 if level else 0
    tiers: list[list[str]] = [[] for _ in range(n_tiers)]
    for i, members in enumerate(blocks):
        tiers[level[i]].extend(members)
    tiers = [sorted(t) for t in tiers]
    tier_index = {m: i for i, t in enumerate(tiers) for m in t}

    intersections = []
    for m in sorted(n for n in flagged if n not in tier_index):
        touched = sorted({tier_index[n] for n in eq[m] if n in tier_index})
        if not touched:
            above = [tier_index[w] for w, l in dom if l == m and w in tier_index]
            touched = [max(above) + 1 if above else 0]
        intersections.append({"model": m, "tiers": touched, "reason": flagged[m]})
    for m in sorted(n for n in flagged if n in tier_index):
        intersections.append({"model": m, "tiers": [tier_index[m]], "reason": flagged[m]})
    return Ranking(tiers, intersections)


def strictly_above(ranking: Ranking, upper: str, lower: str) -> bool:
    return max(ranking.tier_of(upper)) < min(ranking.tier_of(lower))
