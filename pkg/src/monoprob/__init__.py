"""Probabilistic models as ordinary Python programs, with inference by
reifying them into lazy weighted search trees."""
from .core import (
    BranchState,
    ChoiceCounter,
    Closed,
    EmptyChoices,
    InvalidWeight,
    Open,
    Prob,
    ProbError,
    WeightSumExceedsOne,
    dist,
    explore,
    fail,
    lift,
    memo,
    pure,
    reify,
    with_counter,
)
from .inference import (
    SampleReport,
    WeightTable,
    at_least,
    bucketize,
    exact_reify,
    importance_sample,
    nested_exact,
    rejection_sample,
    sampling_as_model,
)
from .stdlib import flip, letlazy, uniform

__version__ = "0.1.0"
