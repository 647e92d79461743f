"""Command line: run bundled models, benchmark them, list them.

Exit codes: 0 success, 2 unknown model, 3 invalid configuration,
4 inference error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .core import Closed, explore, reify, with_counter
from .inference import (
    SampleReport,
    WeightTable,
    exact_reify,
    importance_sample,
    rejection_sample,
)
from .models import REGISTRY, get_model, hmm, model_names
from .models.grass import grass_model, grass_model_lazy

EXIT_UNKNOWN_MODEL = 2
EXIT_BAD_CONFIG = 3
EXIT_INFERENCE = 4

STRATEGIES = ("exact", "rejection", "importance")
_SAMPLERS = {"rejection": rejection_sample, "importance": importance_sample}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    model_name: str
    strategy: str = "exact"
    samples: int | None = None
    seed: int = 0
    depth: int | None = None
    normalize: bool = False
    format: str = "tsv"
    jobs: int = 1

    def validate(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "exact":
            if self.samples is not None:
                raise ConfigError("--samples applies only to sampling strategies")
        else:
            if self.samples is None:
                raise ConfigError(f"--samples is required for --infer {self.strategy}")
            if self.samples < 1:
                raise ConfigError("--samples must be positive")
            if self.depth is not None:
                raise ConfigError("--depth applies only to --infer exact")
        if self.depth is not None and self.depth < 0:
            raise ConfigError("--depth must be nonnegative")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("--seed must be a 64-bit unsigned integer")
        if self.jobs < 1:
            raise ConfigError("--jobs must be positive")
        if self.format not in ("tsv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")


# -- rendering ---------------------------------------------------------------

def render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return " ".join(render_value(e) for e in v)
    return str(v)


def render_weight(w: float) -> str:
    # repr is the shortest string that round-trips
    return repr(float(w))


def _json_value(v):
    if v is None or isinstance(v, (bool, int, float, str)):
        return v
    if isinstance(v, tuple):
        return [_json_value(e) for e in v]
    return render_value(v)


def sorted_rows(weights: dict) -> list[tuple[str, float, object]]:
    rows = [(render_value(v), w, v) for v, w in weights.items()]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def table_checksum(table: WeightTable) -> str:
    # 12 significant digits, so tables equal up to rounding hash alike
    rounded = {v: float(f"{w:.12g}") for v, w in table.items()}
    text = "".join(f"{s}\t{w!r}\n" for s, w, _ in sorted_rows(rounded))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def format_table(table: WeightTable, cfg: RunConfig, runtime: float) -> str:
    evidence = table.total
    weights = table.normalized() if cfg.normalize else dict(table)
    rows = sorted_rows(weights)
    if cfg.format == "tsv":
        lines = [f"{s}\t{render_weight(w)}" for s, w, _ in rows]
        if cfg.normalize:
            lines.append(f"# evidence\t{render_weight(evidence)}")
        return "".join(line + "\n" for line in lines)
    doc = {
        "model": cfg.model_name,
        "strategy": cfg.strategy,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "total": math.fsum(w for _, w, _ in rows),
        "log_total": math.log(evidence) if evidence > 0 else None,
        "entries": [{"value": _json_value(v), "weight": w} for _, w, v in rows],
        "runtime_sec": runtime,
    }
    if cfg.normalize:
        doc["evidence"] = evidence
    return json.dumps(doc, indent=2) + "\n"


# -- running -----------------------------------------------------------------

def _sample_chunk(model_name: str, strategy: str, seed: int, start: int, count: int):
    model = get_model(model_name)
    return _SAMPLERS[strategy](model, count, seed, start).runs


def _chunks(n: int, jobs: int):
    size, extra = divmod(n, jobs)
    start = 0
    for j in range(jobs):
        count = size + (1 if j < extra else 0)
        if count:
            yield start, count
        start += count


def infer(cfg: RunConfig, model) -> WeightTable:
    """Run the configured strategy and return the (estimated) table."""
    if cfg.strategy == "exact":
        if cfg.depth is None:
            return exact_reify(model)
        flat = explore(reify(model), cfg.depth)
        return WeightTable((p.value, w) for w, p in flat if isinstance(p, Closed))
    if cfg.jobs == 1:
        report = _SAMPLERS[cfg.strategy](model, cfg.samples, cfg.seed)
    else:
        report = SampleReport()
        with ProcessPoolExecutor(cfg.jobs) as pool:
            futures = [pool.submit(_sample_chunk, cfg.model_name, cfg.strategy,
                                   cfg.seed, start, count)
                       for start, count in _chunks(cfg.samples, cfg.jobs)]
            for fut in futures:
                report = report.merge(SampleReport(fut.result()))
    return report.estimate()


def cmd_run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg.validate()
    except ConfigError as e:
        print(f"error: {e}", file=err)
        return EXIT_BAD_CONFIG
    try:
        model = get_model(cfg.model_name)
    except KeyError as e:
        print(f"error: {e.args[0]}", file=err)
        return EXIT_UNKNOWN_MODEL
    t0 = time.perf_counter()
    try:
        table = infer(cfg, model)
    except Exception as e:  # model bodies may raise anything
        print(f"error: inference failed: {type(e).__name__}: {e}", file=err)
        return EXIT_INFERENCE
    runtime = time.perf_counter() - t0
    out.write(format_table(table, cfg, runtime))
    return 0


def cmd_list(out=None) -> int:
    out = out or sys.stdout
    for name in model_names():
        print(name, file=out)
    return 0


# -- benchmarking -------------------------------------------------------------

def bench_suite():
    """(family, config label, steps, model thunk) for the default benchmark."""
    ev = hmm.observed_at(5)
    suite = [("grass", "grass", None, grass_model),
             ("grass_lazy", "grass_lazy", None, grass_model_lazy)]
    for n in (6, 8, 10):
        suite.append(("hmm", f"hmm n={n}", n, lambda n=n: hmm.run(n, ev)))
    for n in (10, 20, 40):
        suite.append(("hmm_bucketed", f"hmm_bucketed n={n}", n,
                      lambda n=n: hmm.run_bucketed(n, ev)))
    return suite


@dataclass
class BenchRow:
    config: str
    family: str
    steps: int | None
    strategy: str
    dist_calls: int
    model_invocations: int
    wall_time_sec: float
    checksum: str


def run_bench(families=None, strategy="exact", samples=None, seed=0) -> list[BenchRow]:
    suite = bench_suite()
    known = {fam for fam, *_ in suite}
    if families:
        unknown = sorted(set(families) - known)
        if unknown:
            raise KeyError(f"unknown benchmark model {unknown[0]!r}")
    rows = []
    for fam, label, steps, thunk in suite:
        if families and fam not in families:
            continue
        model, counter = with_counter(thunk)
        t0 = time.perf_counter()
        if strategy == "exact":
            table = exact_reify(model)
        else:
            table = _SAMPLERS[strategy](model, samples, seed).estimate()
        elapsed = time.perf_counter() - t0
        rows.append(BenchRow(label, fam, steps, strategy, counter.dist_calls,
                             counter.model_invocations, elapsed,
                             table_checksum(table)))
    return rows


def cmd_bench(families, strategy, samples, seed, fmt, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    cfg = RunConfig("bench", strategy, samples, seed, None, False, fmt)
    try:
        cfg.validate()
    except ConfigError as e:
        print(f"error: {e}", file=err)
        return EXIT_BAD_CONFIG
    try:
        rows = run_bench(families, strategy, samples, seed)
    except KeyError as e:
        print(f"error: {e.args[0]}", file=err)
        return EXIT_UNKNOWN_MODEL
    except Exception as e:
        print(f"error: inference failed: {type(e).__name__}: {e}", file=err)
        return EXIT_INFERENCE
    if fmt == "json":
        out.write(json.dumps([r.__dict__ for r in rows], indent=2) + "\n")
    else:
        out.write("config\tstrategy\tdist_calls\tmodel_invocations\twall_time_sec\tchecksum\n")
        for r in rows:
            out.write(f"{r.config}\t{r.strategy}\t{r.dist_calls}\t{r.model_invocations}"
                      f"\t{r.wall_time_sec:.6f}\t{r.checksum}\n")
    return 0


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="monoprob", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run inference on a bundled model")
    run.add_argument("--model", required=True)
    run.add_argument("--infer", choices=STRATEGIES, default="exact")
    run.add_argument("--samples", type=int)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--depth", type=int)
    run.add_argument("--normalize", action="store_true")
    run.add_argument("--format", choices=("tsv", "json"), default="tsv")
    run.add_argument("--jobs", type=int, default=1)

    bench = sub.add_parser("bench", help="count choices and time the benchmark suite")
    bench.add_argument("--model", action="append",
                       help="restrict to a family: grass, grass_lazy, hmm, hmm_bucketed")
    bench.add_argument("--infer", choices=STRATEGIES, default="exact")
    bench.add_argument("--samples", type=int)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--format", choices=("tsv", "json"), default="tsv")

    sub.add_parser("list-models", help="print registered model names")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-models":
        return cmd_list()
    if args.command == "bench":
        return cmd_bench(args.model, args.infer, args.samples, args.seed, args.format)
    cfg = RunConfig(args.model, args.infer, args.samples, args.seed, args.depth,
                    args.normalize, args.format, args.jobs)
    return cmd_run(cfg)


if __name__ == "__main__":
    sys.exit(main())
