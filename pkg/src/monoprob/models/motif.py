"""Motif development: random binary splitting with deletion and transposition.

A motif is a lazy list of pitch classes (0-11).  Developing a segment first
picks what happens to the whole segment: it is deleted, transposed a
semitone up or down, or kept.  A surviving segment of length one is a leaf.
A longer segment stops splitting with probability ``q_stop``; otherwise it
is cut at a uniformly chosen point, and both halves are developed
independently and joined with ``lappend``.

Every choice is made only when the output spine reaches it, so a likelihood
query that fails early never decides the rest of the tree.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from ..core import dist, memo
from ..stdlib import (
    NIL,
    flip,
    force_spine,
    from_values,
    lappend,
    lcons,
    lmap,
    observe_list,
    uniform,
)

NOTES = 12
DELETE, UP, DOWN, KEEP = "delete", "up", "down", "keep"


@dataclass(frozen=True)
class MotifParams:
    q_stop: float = 0.3
    p_del: float = 0.2
    p_trans: float = 0.15

    def operations(self):
        keep = 1.0 - self.p_del - 2 * self.p_trans
        return [(self.p_del, DELETE), (self.p_trans, UP),
                (self.p_trans, DOWN), (keep, KEEP)]


DESK_PARAMS = MotifParams()


def _segment_list(cells: Sequence[Callable]):
    lst = lambda: NIL  # noqa: E731
    for c in reversed(cells):
        lst = lcons(c, lst)
    return lst


def _develop(cells: tuple, params: MotifParams):
    ops = params.operations()

    def body():
        if len(cells) == 1:
            return _segment_list(cells)()
        return flip(params.q_stop).bind(split_or_stop)

    def split_or_stop(stop):
        if stop:
            return _segment_list(cells)()
        return uniform(len(cells) - 1).bind(
            lambda i: lappend(_develop(cells[:i + 1], params),
                              _develop(cells[i + 1:], params))())

    def node(op):
        if op == DELETE:
            return NIL
        if op == KEEP:
            return body()
        shift = 1 if op == UP else -1
        return lmap(lambda note: (note + shift) % NOTES, lambda: body())()

    return memo(lambda: dist(ops).bind(node))


def develop_motif(src, params: MotifParams = DESK_PARAMS):
    """Develop lazy list ``src``; yields the developed lazy list.

    The spine of ``src`` is forced to find split points.  Its note cells
    are not forced.
    """
    def start(cells):
        if not cells:
            return lambda: NIL
        return _develop(tuple(cells), params)

    return force_spine(src).map(start)


def motif_likelihood_model(src: Sequence[int] | Callable, dst: Sequence[int],
                           params: MotifParams = DESK_PARAMS, probe=None):
    """Model whose total mass is P(src develops into dst)."""
    src_list = src if callable(src) else from_values(src)
    dst = tuple(dst)

    def model():
        return develop_motif(src_list, params).bind(
            lambda out: observe_list(out, dst, probe)).map(lambda _: True)

    return model


DESK_SRC = (0, 4, 7, 11)
DESK_DST = (1, 5, 7)


def desk_motif():
    return motif_likelihood_model(DESK_SRC, DESK_DST)()
