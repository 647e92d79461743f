"""One-dimensional random-walk HMM with pluggable evidence.

States are ``0 .. nstates-1``.  A step stays put with probability 0.4 and
moves to either neighbour with probability 0.3.  At the edges the move that
would leave the range stays put instead.  State ``i`` shows ``L`` with
probability ``(nstates-1-i)/(nstates-1)``.
"""
from __future__ import annotations

from typing import Callable

from ..core import Prob, dist, fail
from ..inference import bucketize, nested_exact
from ..stdlib import uniform

NSTATES = 8
L, R = "L", "R"

Evidence = Callable[[int, int], object]


def transition_rows(nstates: int = NSTATES) -> list[list[tuple[float, int]]]:
    rows = []
    last = nstates - 1
    for i in range(nstates):
        if i == 0:
            rows.append([(0.7, 0), (0.3, 1)])
        elif i == last:
            rows.append([(0.3, last - 1), (0.7, last)])
        else:
            rows.append([(0.4, i), (0.3, i - 1), (0.3, i + 1)])
    return rows


def l_obs_prob(nstates: int = NSTATES) -> list[float]:
    last = nstates - 1
    return [(last - i) / last for i in range(nstates)]


TRANSITIONS = transition_rows()
L_OBS_PROB = l_obs_prob()

# computations are immutable, so each row's choice node is built once
_EVOLVE = [dist(row) for row in TRANSITIONS]
_OBSERVE = [dist([(p, L), (1.0 - p, R)]) for p in L_OBS_PROB]


def evolve(st: int) -> Prob:
    return _EVOLVE[st]


def observe(st: int) -> Prob:
    return _OBSERVE[st]


def no_evidence(st, n):
    return None


def observed_at(t: int, symbol: str = L) -> Evidence:
    """Evidence: ``symbol`` was seen at time ``t``."""
    def evidence(st, n):
        if n != t:
            return None
        return observe(st).bind(lambda o: None if o == symbol else fail())
    return evidence


def observed_between(t0: int, t1: int, symbol: str = L) -> Evidence:
    """Evidence: ``symbol`` was seen at every time in ``t0 .. t1``."""
    def evidence(st, n):
        if not t0 <= n <= t1:
            return None
        return observe(st).bind(lambda o: None if o == symbol else fail())
    return evidence


def _assert(evidence: Evidence, st: int, n: int) -> Prob | int:
    e = evidence(st, n)
    if e is None:
        return st
    return e.map(lambda _: st)


def run(n: int, evidence: Evidence = no_evidence) -> Prob:
    """State at time ``n``; enumerating it is exponential in ``n``."""
    if n == 1:
        st = uniform(NSTATES)
    else:
        st = run(n - 1, evidence).bind(evolve)
    return st.bind(lambda s: _assert(evidence, s, n))


def run_bucketed(n: int, evidence: Evidence = no_evidence) -> Prob:
    """``run`` with the prefix summarized by nested exact inference.

    Each step chooses the previous state from the exact table of the shorter
    run, so enumeration is linear in ``n``.
    """
    if n == 1:
        st = uniform(NSTATES)
    else:
        prev = nested_exact(lambda: run_bucketed(n - 1, evidence))
        st = prev.bind(lambda table: dist(table) if table else fail()).bind(evolve)
    return st.bind(lambda s: _assert(evidence, s, n))


def bucketized_runner(evidence: Evidence = no_evidence) -> Callable[[int], Prob]:
    """``run`` whose recursive call goes through :func:`bucketize`.

    Buckets are shared by every query made with the returned function.
    """
    def step(n):
        if n == 1:
            st = uniform(NSTATES)
        else:
            st = previous(n - 1).bind(evolve)
        return st.bind(lambda s: _assert(evidence, s, n))

    previous = bucketize(step)
    return step


def query1():
    """State at time 10 given ``L`` observed at time 5."""
    return run(10, observed_at(5))


def query1_bucketed():
    return run_bucketed(10, observed_at(5))


def query_all_l():
    """State at time 10 given ``L`` observed at every time from 5 to 10."""
    return run(10, observed_between(5, 10))
