"""Queries that reason about an inference procedure.

A coin is fair or always-heads with equal probability.  Each query asks
whether the probability of heads, as seen by some inner inference, is at
least 0.3.
"""
from ..core import memo
from ..inference import at_least, nested_exact, sampling_as_model
from ..stdlib import flip

THRESHOLD = 0.3


def coin_exact():
    """Inner exact inference: always true."""
    def with_bias(biased):
        coin = lambda: flip(0.5).map(lambda f: f or biased)  # noqa: E731
        return nested_exact(coin).map(lambda t: at_least(THRESHOLD, True, t))

    return flip(0.5).bind(with_bias)


def coin_sampled(k: int = 2):
    """Inner estimate from ``k`` flips; true with probability 7/8 when k=2."""
    def with_bias(biased):
        coin = lambda: flip(0.5).map(lambda f: f or biased)  # noqa: E731
        return sampling_as_model(k, coin).map(lambda t: at_least(THRESHOLD, True, t))

    return flip(0.5).bind(with_bias)


def coin_memo():
    """As :func:`coin_exact`, with the bias a memoized outer variable."""
    biased = memo(lambda: flip(0.5))
    coin = lambda: flip(0.5).bind(lambda f: True if f else biased())  # noqa: E731
    return nested_exact(coin).map(lambda t: at_least(THRESHOLD, True, t))
