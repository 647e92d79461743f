"""Inference procedures over reified search trees."""
from __future__ import annotations

import math
import random
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .core import (
    SUM_TOLERANCE,
    Ask,
    BranchState,
    Closed,
    InvalidWeight,
    Open,
    Prob,
    WeightSumExceedsOne,
    response_total,
    dist,
    fail,
    freeze_key,
    reify,
)

__all__ = [
    "WeightTable", "SampleReport", "exact_reify", "nested_exact",
    "rejection_sample", "importance_sample", "rejection_run", "importance_run",
    "sampling_as_model", "at_least", "bucketize", "run_seed",
]

_SEED_MASK = (1 << 64) - 1


class WeightTable(Mapping):
    """Immutable map from outcomes to positive weights summing to at most 1.

    Iteration follows insertion order, which for :func:`exact_reify` is the
    depth-first order in which outcomes were first reached.
    """

    __slots__ = ("_w", "total")

    def __init__(self, weights: Mapping | Iterable = ()):
        items = weights.items() if isinstance(weights, Mapping) else weights
        w = {}
        for v, p in items:
            p = float(p)
            if not math.isfinite(p) or p < 0.0:
                raise InvalidWeight(f"table weight {p!r} for {v!r}")
            if p > 0.0:
                w[v] = w.get(v, 0.0) + p
        self._w = w
        self.total = math.fsum(w.values())
        if self.total > 1.0 + SUM_TOLERANCE:
            raise WeightSumExceedsOne(f"table total {self.total!r} > 1")

    def __getitem__(self, v):
        return self._w[v]

    def __iter__(self):
        return iter(self._w)

    def __len__(self):
        return len(self._w)

    def weight(self, v) -> float:
        return self._w.get(v, 0.0)

    def normalized(self) -> dict:
        """Conditional distribution given success; empty if the total is 0."""
        if self.total == 0.0:
            return {}
        return {v: p / self.total for v, p in self._w.items()}

    def close_to(self, other: Mapping, tol: float = 1e-9) -> bool:
        keys = set(self) | set(other)
        return all(abs(self.weight(k) - other.get(k, 0.0)) <= tol for k in keys)

    def __hash__(self):
        return hash(frozenset(self._w.items()))

    def __repr__(self):
        body = ", ".join(f"{v!r}: {p!r}" for v, p in self._w.items())
        return f"WeightTable({{{body}}})"


def exact_reify(model, state: BranchState | None = None) -> WeightTable:
    """Enumerate the whole tree depth-first, left to right.

    Leaf weights are products along their paths; equal outcomes are summed.
    There is no depth guard: an infinite tree does not terminate.
    """
    acc: dict = {}
    stack = list(reversed(reify(model, state)))
    while stack:
        w, poss = stack.pop()
        if type(poss) is Closed:
            acc[poss.value] = acc.get(poss.value, 0.0) + w
        else:
            stack.extend((w * p, q) for p, q in reversed(poss()))
    return WeightTable(acc)


def nested_exact(model) -> Prob:
    """Exact inference as a step of an enclosing model.

    The inner query starts from the enclosing branch's memo table and its
    choices are charged to the enclosing branch's counters.
    """
    return Ask(lambda st: exact_reify(model, st))


def at_least(threshold: float, value, table: Mapping) -> bool:
    return table.get(value, 0.0) >= threshold


def bucketize(f: Callable[[Any], Any]) -> Callable[[Any], Prob]:
    """Replace a stochastic function by a choice from its memoized exact table.

    Call this before inference starts so every query shares the same buckets.
    Each bucket is computed once per distinct argument, from an empty memo
    table; ``f`` must therefore depend on its argument alone.
    """
    buckets: dict = {}

    def choose(x) -> Prob:
        key = freeze_key((x,))

        def from_bucket(st: BranchState):
            table = buckets.get(key)
            if table is None:
                table = exact_reify(lambda: f(x), BranchState({}, st.counters))
                buckets[key] = table
            # an all-failing bucket is zero mass, not an empty dist
            return dist(table) if table else fail()

        return Ask(from_bucket)

    choose.buckets = buckets
    return choose


# -- sampling ----------------------------------------------------------------

def run_seed(seed: int, run: int) -> int:
    """Seed of run ``run`` in a sampling job started with ``seed``."""
    return (seed + run) & _SEED_MASK


def _pick(weighted: list, total: float, rng: random.Random) -> int:
    u = rng.random() * total
    acc = 0.0
    last = -1
    for i, item in enumerate(weighted):
        w = item[0]
        if w <= 0.0:
            continue
        acc += w
        last = i
        if u < acc:
            return i
    return last


def rejection_run(model, rng: random.Random) -> tuple:
    """One root-to-leaf walk; deficit mass at any node fails the run."""
    r = reify(model)
    while True:
        u = rng.random()
        acc = 0.0
        chosen = None
        for w, poss in r:
            acc += w
            if u < acc:
                chosen = poss
                break
        if chosen is None:
            return ()
        if type(chosen) is Closed:
            return ((chosen.value, 1.0),)
        r = chosen()


def importance_run(model, rng: random.Random) -> tuple:
    """One run of importance sampling with one level of look-ahead.

    Returns the ``(value, weight)`` reports made during the run.  Shallow
    outcomes, whether closed children or children whose response is a single
    closed outcome, are reported exactly.  The walk then descends into one
    deeper child chosen in proportion to its look-ahead mass.
    """
    reports = []
    pc = 1.0
    r = reify(model)
    while r:
        if len(r) == 1 and type(r[0][1]) is not Closed:
            p, poss = r[0]
            pc *= p
            r = poss()
            continue
        candidates = []
        for p, poss in r:
            if type(poss) is Closed:
                w = pc * p
                if w > 0.0:
                    reports.append((poss.value, w))
                continue
            r2 = poss()
            if len(r2) == 1 and type(r2[0][1]) is Closed:
                w = pc * p * r2[0][0]
                if w > 0.0:
                    reports.append((r2[0][1].value, w))
            else:
                pt = response_total(r2)
                candidates.append((p * pt, r2, pt))
        total = sum([c[0] for c in candidates])
        if total == 0.0:
            break
        _, r2, pt = candidates[_pick(candidates, total, rng)]
        pc *= total
        r = tuple((w / pt, poss) for w, poss in r2)
    return tuple(reports)


@dataclass
class SampleReport:
    """Per-run reports of a sampling job.

    The estimate for a value is the sum of its reported weights divided by
    the number of runs.
    """

    runs: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.runs)

    def merge(self, other: "SampleReport") -> "SampleReport":
        return SampleReport(self.runs + other.runs)

    def per_run_totals(self, value) -> list:
        return [math.fsum(w for v, w in run if v == value) for run in self.runs]

    def estimate(self) -> WeightTable:
        sums: dict = {}
        for run in self.runs:
            for v, w in run:
                sums[v] = sums.get(v, 0.0) + w
        n = self.n
        return WeightTable({v: s / n for v, s in sums.items()}) if n else WeightTable()

    def standard_error(self, value) -> float:
        xs = self.per_run_totals(value)
        n = len(xs)
        if n < 2:
            return math.inf
        mean = math.fsum(xs) / n
        var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
        return math.sqrt(var / n)


def _sample(run_one, model, n: int, seed: int, start: int = 0) -> SampleReport:
    if n < 1:
        raise ValueError("number of runs must be positive")
    runs = []
    for i in range(start, start + n):
        runs.append(run_one(model, random.Random(run_seed(seed, i))))
    return SampleReport(runs)


def rejection_sample(model, n: int, seed: int = 0, start: int = 0) -> SampleReport:
    """Rejection sampling: each successful run reports its leaf with weight 1."""
    return _sample(rejection_run, model, n, seed, start)


def importance_sample(model, n: int, seed: int = 0, start: int = 0) -> SampleReport:
    """Importance sampling with look-ahead over ``n`` runs.

    Run ``i`` draws from ``random.Random(seed + i)``, so a job can be split
    into chunks by ``start`` without changing any run.
    """
    return _sample(importance_run, model, n, seed, start)


def sampling_as_model(k: int, model) -> Prob:
    """Estimate ``model``'s distribution from ``k`` samples, inside a model.

    Each branch selection of the inner walks is a ``dist`` of the enclosing
    model, so outer inference enumerates the sampler's own coin flips.  A walk
    that runs into failure mass fails the enclosing branch.
    """
    if k < 1:
        raise ValueError("k must be positive")

    def walk(r) -> Prob:
        if not r:
            return fail()
        return dist([(w, i) for i, (w, _) in enumerate(r)]).bind(
            lambda i: step(r[i][1]))

    def step(poss):
        if type(poss) is Closed:
            return poss.value
        return walk(poss())

    def start(st: BranchState) -> Prob:
        root = reify(model, st)

        def draw(i, got):
            if i == k:
                counts: dict = {}
                for v in got:
                    counts[v] = counts.get(v, 0) + 1
                return WeightTable({v: c / k for v, c in counts.items()})
            return walk(root).bind(lambda v: draw(i + 1, got + (v,)))

        return draw(0, ())

    return Ask(start)
