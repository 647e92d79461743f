"""Brute-force enumeration by trail replay.

This is a verification oracle.  It shares only the model language with the
main runtime and never suspends anything.  Every complete sequence of choice
indices is enumerated, and the model is re-run from scratch once per
sequence.  It is slow by design.
"""
from __future__ import annotations

from .core import Ask, Bind, BranchState, Counted, Dist, Fail, MemoApply, Prob, Pure
from .inference import WeightTable

__all__ = ["oracle_enumerate", "replay"]


class _NeedChoice(Exception):
    def __init__(self, width):
        self.width = width


class _Failed(Exception):
    pass


def _eval(m, trail, pos, memo: dict):
    """Evaluate ``m`` along ``trail``; returns (value, weight, pos)."""
    weight = 1.0
    stack: list = []
    while True:
        if isinstance(m, Bind):
            stack.append(m.f)
            m = m.m
            continue
        if isinstance(m, Dist):
            if pos == len(trail):
                raise _NeedChoice(len(m.entries))
            w, v = m.entries[trail[pos]]
            pos += 1
            weight *= w
            m = Pure(v)
            continue
        if isinstance(m, Fail):
            raise _Failed
        if isinstance(m, MemoApply):
            if m.key in memo:
                m = Pure(memo[m.key])
            else:
                stack.append(("store", m.key))
                m = m.thunk()
            continue
        if isinstance(m, Ask):
            m = m.fn(BranchState(dict(memo), ()))
            continue
        if isinstance(m, Counted):
            m = m.m
            continue
        value = m.value if isinstance(m, Pure) else m
        if isinstance(value, Prob):
            raise TypeError(f"unknown computation node {value!r}")
        if not stack:
            return value, weight, pos
        f = stack.pop()
        if isinstance(f, tuple) and len(f) == 2 and f[0] == "store":
            memo[f[1]] = value
            m = Pure(value)
        else:
            m = f(value)


def replay(model, trail):
    """Run ``model`` once along ``trail``.

    Returns ``("leaf", value, weight)``, ``("fail",)`` or ``("branch", width)``
    when the trail ends before the model does.
    """
    try:
        value, weight, _ = _eval(model(), list(trail), 0, {})
    except _NeedChoice as e:
        return ("branch", e.width)
    except _Failed:
        return ("fail",)
    return ("leaf", value, weight)


def oracle_enumerate(model) -> WeightTable:
    acc: dict = {}
    trails = [()]
    while trails:
        trail = trails.pop()
        out = replay(model, trail)
        if out[0] == "leaf":
            acc[out[1]] = acc.get(out[1], 0.0) + out[2]
        elif out[0] == "branch":
            trails.extend(trail + (i,) for i in reversed(range(out[1])))
    return WeightTable(acc)
