"""Bundled models and the name registry used by the command line."""
from __future__ import annotations

from typing import Callable

from . import coins, grass, hmm, motif

# name -> model thunk
REGISTRY: dict[str, Callable] = {
    "grass": grass.grass_model,
    "grass_lazy": grass.grass_model_lazy,
    "hmm_query1": hmm.query1,
    "hmm_query1_bucketed": hmm.query1_bucketed,
    "hmm_query_all_l": hmm.query_all_l,
    "hmm_query5": lambda: hmm.run(5, hmm.observed_at(5)),
    "coin_a": coins.coin_exact,
    "coin_b": coins.coin_sampled,
    "coin_c": coins.coin_memo,
    "motif": motif.desk_motif,
}


def model_names() -> list[str]:
    return sorted(REGISTRY)


def get_model(name: str) -> Callable:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}") from None
