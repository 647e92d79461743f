"""Model language and reification into lazy weighted search trees.

A model is a thunk returning a :class:`Prob` computation.  Computations are
built from :func:`dist`, :func:`fail`, :func:`memo` and ``Prob.bind``; any
plain Python value returned where a computation is expected is treated as a
deterministic result.

Reification interprets a computation with an explicit continuation stack.
When the model reaches a ``dist`` node, the interpreter stops and hands back
one :class:`Open` possibility per choice.  Each one closes over the
(immutable) continuation stack and branch state at that point.  Requesting an
``Open`` resumes from the suspension point.  Nothing before it is re-executed,
and the same ``Open`` can be requested any number of times.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from collections.abc import Mapping
from typing import Any, Callable, Union

__all__ = [
    "ProbError", "EmptyChoices", "InvalidWeight", "WeightSumExceedsOne",
    "Prob", "Pure", "Dist", "Fail", "Bind", "MemoApply", "Ask", "Counted",
    "Closed", "Open", "Response", "BranchState", "ChoiceCounter",
    "pure", "lift", "dist", "fail", "memo", "reify", "explore", "with_counter",
    "response_total", "check_response", "freeze_key", "SUM_TOLERANCE",
]

SUM_TOLERANCE = 1e-9


class ProbError(Exception):
    """Base class for errors raised by the inference runtime."""


class EmptyChoices(ProbError, ValueError):
    pass


class InvalidWeight(ProbError, ValueError):
    pass


class WeightSumExceedsOne(ProbError, ValueError):
    pass


# -- computations ------------------------------------------------------------

class Prob:
    """A stochastic computation; the unit of the model language."""

    __slots__ = ()

    def bind(self, f: Callable[[Any], Any]) -> "Prob":
        return Bind(self, f)

    def map(self, f: Callable[[Any], Any]) -> "Prob":
        return Bind(self, lambda v: Pure(f(v)))

    def then(self, k: Callable[[], Any]) -> "Prob":
        """Sequence ``k()`` after this computation, discarding its value."""
        return Bind(self, lambda _: k())


class Pure(Prob):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return f"Pure({self.value!r})"


class Dist(Prob):
    __slots__ = ("entries",)

    def __init__(self, entries: tuple):
        self.entries = entries

    def __repr__(self):
        return f"Dist({list(self.entries)!r})"


class Fail(Prob):
    __slots__ = ()

    def __repr__(self):
        return "Fail()"


class Bind(Prob):
    __slots__ = ("m", "f")

    def __init__(self, m: Prob, f: Callable[[Any], Any]):
        self.m = m
        self.f = f


class MemoApply(Prob):
    """Application of a memoized function; ``key`` identifies cell and argument."""

    __slots__ = ("key", "thunk")

    def __init__(self, key, thunk: Callable[[], Any]):
        self.key = key
        self.thunk = thunk


class Ask(Prob):
    """Run ``fn(state)`` against the current branch state.

    Used by nested inference so an inner query sees the enclosing branch's
    memo table and choice counters.
    """

    __slots__ = ("fn",)

    def __init__(self, fn: Callable[["BranchState"], Any]):
        self.fn = fn


class Counted(Prob):
    __slots__ = ("counter", "m")

    def __init__(self, counter: "ChoiceCounter", m: Prob):
        self.counter = counter
        self.m = m


_FAIL = Fail()


def pure(value) -> Prob:
    return Pure(value)


def fail() -> Prob:
    """Terminate the current branch; its subtree is the empty response."""
    return _FAIL


def _as_weight(p) -> float:
    if type(p) is float and 0.0 <= p < math.inf:
        return p
    try:
        w = float(p)
    except (TypeError, ValueError):
        raise InvalidWeight(f"weight {p!r} is not a number") from None
    if not math.isfinite(w) or w < 0.0:
        raise InvalidWeight(f"weight {p!r} must be finite and nonnegative")
    return w


def dist(choices) -> Prob:
    """Choose among ``(weight, value)`` pairs.

    ``choices`` may also be a mapping from values to weights, such as a
    :class:`~monoprob.inference.WeightTable`.  Zero weights are dropped, and
    duplicate values are kept as separate children.  A total below 1 is
    allowed: the missing mass behaves like failure.
    """
    if type(choices) in (list, tuple) or not isinstance(choices, Mapping):
        pairs = choices
    else:
        pairs = ((w, v) for v, w in choices.items())
    entries = []
    total = 0.0
    for p, v in pairs:
        w = _as_weight(p)
        if w > 0.0:
            entries.append((w, v))
            total += w
    if not entries:
        raise EmptyChoices("dist needs at least one positive-weight choice")
    if total > 1.0 + SUM_TOLERANCE:
        raise WeightSumExceedsOne(f"choice weights sum to {total!r} > 1")
    return Dist(tuple(entries))


def _freeze(x):
    if isinstance(x, (list, tuple)):
        return tuple(_freeze(e) for e in x)
    if isinstance(x, (set, frozenset)):
        return frozenset(_freeze(e) for e in x)
    if isinstance(x, dict):
        return frozenset((_freeze(k), _freeze(v)) for k, v in x.items())
    return x


def freeze_key(args: tuple):
    """Structural equality key for memo arguments."""
    try:
        hash(args)
        return args
    except TypeError:
        return _freeze(args)


class _Cell:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return f"<memo cell {self.name}>"


def memo(f: Callable[..., Any]) -> Callable[..., Prob]:
    """Memoize a (possibly stochastic) function per branch.

    The first call with a given argument runs ``f`` on the current branch and
    caches the result in that branch's state; later calls with an equal
    argument on the same branch reuse it.  Sibling branches never see each
    other's entries.
    """
    cell = _Cell(getattr(f, "__qualname__", "?"))

    def memoized(*args):
        return MemoApply((cell, freeze_key(args)), lambda: f(*args))

    memoized.cell = cell
    return memoized


# -- search tree -------------------------------------------------------------

@dataclass(frozen=True)
class Closed:
    """A finished branch carrying its outcome."""

    value: Any


class Open:
    """An unexpanded branch; call it to compute its response.

    ``request`` is any thunk returning a response; hand-built responses are
    validated when requested.
    """

    __slots__ = ("request",)

    def __init__(self, request: Callable[[], "Response"]):
        self.request = request

    def __call__(self) -> "Response":
        return check_response(self.request())

    def __repr__(self):
        return "Open(...)"


Possibility = Union[Closed, Open]
Response = tuple  # tuple[tuple[float, Possibility], ...]


def response_total(r: Response) -> float:
    return sum([w for w, _ in r])


def check_response(r: Response) -> Response:
    """Validate weights of a (possibly hand-built) response."""
    total = 0.0
    for w, _ in r:
        if type(w) is not float and not isinstance(w, (int, float)):
            raise InvalidWeight(f"response weight {w!r} is not a number")
        if not math.isfinite(w) or w < 0.0:
            raise InvalidWeight(f"response weight {w!r} must be finite and nonnegative")
        total += w
    if total > 1.0 + SUM_TOLERANCE:
        raise WeightSumExceedsOne(f"response weights sum to {total!r} > 1")
    return r


@dataclass
class ChoiceCounter:
    dist_calls: int = 0
    model_invocations: int = 0


@dataclass(frozen=True)
class BranchState:
    """Per-branch memo table plus the counters active on this branch.

    Treated as immutable: :meth:`remember` returns a new state, so a branch
    that extends its table never affects a sibling holding the old one.
    """

    memo: Mapping = field(default_factory=dict)
    counters: tuple = ()

    def remember(self, key, value) -> "BranchState":
        table = dict(self.memo)
        table[key] = value
        return BranchState(table, self.counters)

    def with_counter(self, counter: ChoiceCounter) -> "BranchState":
        return BranchState(self.memo, self.counters + (counter,))

    def without_last_counter(self) -> "BranchState":
        return BranchState(self.memo, self.counters[:-1])

    def detached(self) -> "BranchState":
        """Same memo table, no counters."""
        return BranchState(self.memo, ())


EMPTY_STATE = BranchState()


class _Store:
    __slots__ = ("key",)

    def __init__(self, key):
        self.key = key


class _PopCounter:
    __slots__ = ()


_POP_COUNTER = _PopCounter()
_MISSING = object()


def _run(m, frames, state: BranchState) -> Response:
    # frames is an immutable cons list: (frame, rest) | None
    while True:
        t = type(m)
        if t is Bind:
            frames = (m.f, frames)
            m = m.m
        elif t is Dist:
            for c in state.counters:
                c.dist_calls += 1
            entries = m.entries
            if len(entries) == 1 and entries[0][0] == 1.0:
                # a certain choice is not a branch point
                m = Pure(entries[0][1])
                continue
            return tuple(
                (w, _Resumption(v, frames, state)) for w, v in m.entries
            )
        elif t is Fail:
            return ()
        elif t is MemoApply:
            hit = state.memo.get(m.key, _MISSING)
            if hit is _MISSING:
                frames = (_Store(m.key), frames)
                m = m.thunk()
            else:
                m = Pure(hit)
        elif t is Ask:
            m = m.fn(state)
        elif t is Counted:
            m.counter.model_invocations += 1
            state = state.with_counter(m.counter)
            frames = (_POP_COUNTER, frames)
            m = m.m
        else:
            value = m.value if t is Pure else m
            if isinstance(value, Prob):
                raise TypeError(f"unknown computation node {value!r}")
            # deliver the value to the innermost real continuation
            while True:
                if frames is None:
                    return ((1.0, Closed(value)),)
                f, frames = frames
                ft = type(f)
                if ft is _Store:
                    state = state.remember(f.key, value)
                elif ft is _PopCounter:
                    state = state.without_last_counter()
                else:
                    m = f(value)
                    break


class _Resumption(Open):
    """Continuation of a model from one choice of a ``dist``."""

    __slots__ = ("value", "frames", "state")

    def __init__(self, value, frames, state):
        self.value = value
        self.frames = frames
        self.state = state

    def __call__(self) -> Response:
        return _run(Pure(self.value), self.frames, self.state)


def reify(model, state: BranchState | None = None) -> Response:
    """Reify ``model`` into its root response.

    Only the code up to the first choice point runs; deeper levels are
    computed when their :class:`Open` possibilities are requested.  ``model``
    may be a thunk or an :class:`Open` possibility (which is just requested).
    """
    if isinstance(model, Open):
        return model()
    st = EMPTY_STATE if state is None else state
    return _run(model(), None, st)


def explore(response: Response, depth: int | None = None) -> Response:
    """Flatten ``response`` down to ``depth`` levels of open possibilities.

    Weights are multiplied along paths and equal closed values are merged.
    Possibilities still open at the depth bound are kept, rescaled by their
    path weight.  ``depth=None`` explores the whole (finite) tree.
    """
    if depth is not None and depth < 0:
        raise ValueError("depth must be nonnegative")
    closed: dict = {}
    opens = []
    stack = [(1.0, 0, response, 0)]
    while stack:
        scale, level, r, i = stack.pop()
        if i >= len(r):
            continue
        stack.append((scale, level, r, i + 1))
        w, poss = r[i]
        pw = scale * w
        if isinstance(poss, Closed):
            key = poss.value
            closed[key] = closed.get(key, 0.0) + pw
        elif depth is None or level < depth:
            stack.append((pw, level + 1, poss(), 0))
        else:
            opens.append((pw, poss))
    return tuple((w, Closed(v)) for v, w in closed.items()) + tuple(opens)


def with_counter(model) -> tuple[Callable[[], Prob], ChoiceCounter]:
    """Wrap ``model`` so its dist calls and invocations are counted.

    Choices made by nested inference inside the model are counted too.
    """
    counter = ChoiceCounter()

    def counted():
        return Counted(counter, lift(model()))

    return counted, counter


def lift(x) -> Prob:
    """``x`` itself if it is a computation, else a deterministic one."""
    return x if isinstance(x, Prob) else Pure(x)
