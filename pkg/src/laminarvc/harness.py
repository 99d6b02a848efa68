"""Growth experiments: seeded sampling of parameter sets, realized type
counts per size, per-trial exponent fits, and CSV/JSON emission."""

from __future__ import annotations

import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from random import Random
from typing import Optional

from .errors import DomainError, ResourceCapError
from .models import (
    GROWTH_KINDS,
    CarrierModel,
    OrderModel,
    growth_formula,
    load_model,
    random_ultrametric,
)
from .setsystem import ENUM_CAP, GrowthPoint, GrowthSeries, type_space

CSV_HEADER = ("model", "formula", "arity", "m", "trial", "seed", "type_count", "ms")


def thread_budget() -> int:
    env = os.environ.get("LAMINAR_VC_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


@dataclass(frozen=True)
class ExperimentConfig:
    formula_kind: str
    arity: int
    sizes: tuple[int, ...]
    trials: int = 5
    seed: int = 0
    tol: float = 0.15
    cap: int = ENUM_CAP
    model_path: Optional[str] = None
    leaf_count: Optional[int] = None
    max_branching: int = 3
    allow_duplicate_params: bool = False

    def __post_init__(self):
        if self.formula_kind not in GROWTH_KINDS:
            raise DomainError(f"unknown formula kind {self.formula_kind!r}; known: {GROWTH_KINDS}")
        if self.arity not in (1, 2):
            raise DomainError("object arity must be 1 or 2")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if len(self.sizes) < 3:
            raise DomainError("need at least 3 sizes to fit an exponent")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise DomainError("sizes must be strictly increasing")
        if any(m < 2 for m in self.sizes):
            raise DomainError("sizes must be >= 2")

    @property
    def ceiling(self) -> float:
        return self.arity + self.tol


@dataclass(frozen=True)
class GrowthRow:
    model: str
    formula: str
    arity: int
    m: int
    trial: int
    seed: int
    type_count: int
    ms: int
    complete: bool = True


@dataclass(frozen=True)
class GrowthReport:
    config: ExperimentConfig
    model_label: str
    rows: tuple[GrowthRow, ...]
    series: tuple[GrowthSeries, ...]
    exponents: tuple[float, ...]
    median_exponent: float
    ceiling: float
    passed: bool
    complete: bool

    def to_json(self) -> dict:
        return {
            "config": asdict(self.config),
            "model": self.model_label,
            "rows": [asdict(r) for r in self.rows],
            "exponents": list(self.exponents),
            "median_exponent": self.median_exponent,
            "ceiling": self.ceiling,
            "passed": self.passed,
            "complete": self.complete,
        }


def resolve_model(config: ExperimentConfig) -> CarrierModel:
    if config.model_path:
        model = load_model(config.model_path)
        if not hasattr(model, "size"):
            raise DomainError("growth needs an ultrametric or order model, not a raw family")
        return model
    top = max(config.sizes)
    if config.formula_kind == "pair-equality":
        return OrderModel(2 * top, seed=config.seed)
    leaves = config.leaf_count or max(16, 2 * top)
    return random_ultrametric(leaves, config.max_branching, config.seed)


def _sample_params(rng: Random, space: int, arity: int, m: int, carrier_size: int,
                   with_replacement: bool) -> list[tuple[int, ...]]:
    if not with_replacement and m > space:
        raise DomainError(f"cannot sample {m} distinct parameter tuples from {space}")
    if with_replacement:
        idxs = [rng.randrange(space) for _ in range(m)]
    else:
        idxs = rng.sample(range(space), m)
    out = []
    for idx in idxs:
        t = []
        for _ in range(arity):
            idx, r = divmod(idx, carrier_size)
            t.append(r)
        out.append(tuple(reversed(t)))
    return out


def run_growth(config: ExperimentConfig) -> GrowthReport:
    """Run every (size, trial) cell, fit one exponent per trial, and compare
    the median against the ceiling.  Rows are sorted before aggregation so the
    output is independent of scheduling."""
    model = resolve_model(config)
    formula = growth_formula(config.formula_kind, config.arity)
    space = model.size**formula.param_arity

    def cell(args) -> GrowthRow:
        m, t = args
        rng = Random(f"{config.seed}/{m}/{t}")
        params = _sample_params(
            rng, space, formula.param_arity, m, model.size, config.allow_duplicate_params
        )
        t0 = time.perf_counter()
        space_result = type_space([formula], params, model, config.arity, cap=config.cap)
        ms = int(round((time.perf_counter() - t0) * 1000))
        return GrowthRow(
            model.label, formula.name, config.arity, m, t, config.seed,
            space_result.count, ms, space_result.complete,
        )

    jobs = [(m, t) for m in config.sizes for t in range(config.trials)]
    rows: list[GrowthRow] = []
    complete = True
    workers = min(thread_budget(), len(jobs))
    try:
        if workers <= 1:
            for job in jobs:
                rows.append(cell(job))
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows.extend(pool.map(cell, jobs))
    except ResourceCapError:
        complete = False
    rows.sort(key=lambda r: (r.m, r.trial))

    series = []
    exponents = []
    if complete:
        for t in range(config.trials):
            pts = tuple(
                GrowthPoint(r.m, r.type_count, r.seed) for r in rows if r.trial == t
            )
            s = GrowthSeries(pts).with_fit()
            series.append(s)
            exponents.append(s.fitted_exponent)
    median = statistics.median(exponents) if exponents else float("nan")
    passed = complete and median <= config.ceiling
    return GrowthReport(
        config=config,
        model_label=model.label,
        rows=tuple(rows),
        series=tuple(series),
        exponents=tuple(exponents),
        median_exponent=median,
        ceiling=config.ceiling,
        passed=passed,
        complete=complete,
    )


def csv_text(report: GrowthReport) -> str:
    lines = [",".join(CSV_HEADER)]
    for r in report.rows:
        lines.append(
            f"{r.model},{r.formula},{r.arity},{r.m},{r.trial},{r.seed},{r.type_count},{r.ms}"
        )
    return "\n".join(lines) + "\n"


def write_csv(report: GrowthReport, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(report))
