"""Stochastic helpers and lazy lists for writing models."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

from .core import Dist, InvalidWeight, Prob, dist, fail, lift, memo

__all__ = [
    "flip", "uniform", "letlazy", "NIL", "LCons", "nil", "lcons",
    "from_values", "from_thunks", "lappend", "lmap", "force_list",
    "force_spine", "observe_list",
]


def flip(p: float) -> Prob:
    """``True`` with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise InvalidWeight(f"flip probability {p!r} outside [0, 1]")
    if p == 1.0:
        return _HEADS
    if p == 0.0:
        return _TAILS
    return Dist(((float(p), True), (1.0 - p, False)))


_HEADS = Dist(((1.0, True),))
_TAILS = Dist(((1.0, False),))


def uniform(n: int) -> Prob:
    """Uniform choice of ``0 .. n-1``."""
    w = 1.0 / n if n > 0 else 0.0
    return dist([(w, i) for i in range(n)])


def letlazy(thunk: Callable[[], Any]) -> Callable[[], Prob]:
    """Defer ``thunk`` until first forced, then reuse its value on the branch.

    A cell that is never forced makes no choices at all.
    """
    return memo(thunk)


# -- lazy lists --------------------------------------------------------------
#
# A lazy list is a nullary function returning (a computation of) NIL or an
# LCons.  Heads are nullary functions too.  Spine and element cells are
# memoized separately, so the spine can be walked without choosing elements.

class _Nil:
    __slots__ = ()

    def __repr__(self):
        return "NIL"


NIL = _Nil()


@dataclass(frozen=True, eq=False)
class LCons:
    head: Callable[[], Any]
    tail: Callable[[], Any]


def nil():
    return NIL


def lcons(head: Callable[[], Any], tail: Callable[[], Any]):
    cell = LCons(head, tail)
    return lambda: cell


def from_thunks(thunks: Sequence[Callable[[], Any]]):
    """Lazy list whose elements are the (lazily forced) ``thunks``."""
    lst = nil
    for t in reversed(list(thunks)):
        lst = lcons(letlazy(t), lst)
    return lst


def from_values(values: Iterable):
    lst = nil
    for v in reversed(list(values)):
        lst = lcons(_const(v), lst)
    return lst


def _const(v):
    return lambda: v


def lappend(y, z):
    """Lazy concatenation; element cells are passed through unforced."""
    def step(c):
        if c is NIL:
            return z()
        return LCons(c.head, lappend(c.tail, z))

    return memo(lambda: lift(y()).bind(step))


def lmap(f: Callable[[Any], Any], lst):
    """Lazy elementwise ``f``; each mapped element is its own memo cell."""
    def step(c):
        if c is NIL:
            return NIL
        h = c.head
        return LCons(memo(lambda: lift(h()).map(f)), lmap(f, c.tail))

    return memo(lambda: lift(lst()).bind(step))


def force_spine(lst) -> Prob:
    """Force the spine only; yields the tuple of (unforced) element cells."""
    def go(l, acc):
        return lift(l()).bind(
            lambda c: acc if c is NIL else go(c.tail, acc + (c.head,)))

    return go(lst, ())


def force_list(lst) -> Prob:
    """Force spine and elements in order; yields a tuple of elements."""
    def go(l, acc):
        def step(c):
            if c is NIL:
                return acc
            return lift(c.head()).bind(lambda h: go(c.tail, acc + (h,)))
        return lift(l()).bind(step)

    return go(lst, ())


def observe_list(lst, expected: Sequence, probe: Callable[[int], None] | None = None) -> Prob:
    """Fail unless ``lst`` equals ``expected``.

    Cells are forced one at a time and the branch fails at the first
    mismatch, so nothing past it is chosen.  ``probe(i)`` is called before
    element ``i`` is forced.
    """
    n = len(expected)

    def go(l, i):
        def step(c):
            if c is NIL:
                return None if i == n else fail()
            if i == n:
                return fail()
            if probe is not None:
                probe(i)
            return lift(c.head()).bind(
                lambda h: go(c.tail, i + 1) if h == expected[i] else fail())
        return lift(l()).bind(step)

    return go(lst, 0)
