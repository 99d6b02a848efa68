"""Finite set systems: traces, shatter functions, VC dimension, and type spaces.

Type counting here is *realized*: a sign vector is counted only if some tuple
of carrier elements actually produces it.  Realized counts under-approximate
abstract type spaces, so they are valid as growth lower bounds and as inputs
to upper-bound checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from random import Random
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, ResourceCapError

UNIVERSE_CAP = 4096
VC_UNIVERSE_CAP = 24
ENUM_CAP = 1 << 26
_SWEEP_CHUNK = 1 << 16


@dataclass(frozen=True)
class Universe:
    """Ground set {0, ..., size-1}."""

    size: int
    cap: int = UNIVERSE_CAP

    def __post_init__(self):
        if self.size < 1:
            raise DomainError(f"universe size must be >= 1, got {self.size}")
        if self.size > self.cap:
            raise DomainError(f"universe size {self.size} exceeds cap {self.cap}")

    def elements(self) -> range:
        return range(self.size)


@dataclass(frozen=True)
class SetFamily:
    """An indexed list of subsets of a universe.

    Duplicate member sets are retained (they keep distinct indices), but every
    trace is deduplicated.
    """

    universe: Universe
    sets: tuple[frozenset[int], ...]

    def __post_init__(self):
        n = self.universe.size
        for i, s in enumerate(self.sets):
            for x in s:
                if not 0 <= x < n:
                    raise DomainError(f"set {i} contains {x}, outside universe of size {n}")

    @staticmethod
    def of(universe_size: int, sets: Iterable[Iterable[int]]) -> "SetFamily":
        return SetFamily(Universe(universe_size), tuple(frozenset(s) for s in sets))

    def __len__(self) -> int:
        return len(self.sets)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << x for x in s) for s in self.sets)

    @cached_property
    def has_duplicates(self) -> bool:
        return len(set(self.sets)) < len(self.sets)


def trace(family: SetFamily, probe: Iterable[int]) -> SetFamily:
    """Deduplicated family {S & probe : S in family}, members keeping their labels."""
    probe_set = frozenset(probe)
    n = family.universe.size
    for x in probe_set:
        if not 0 <= x < n:
            raise DomainError(f"probe element {x} outside universe of size {n}")
    seen: set[frozenset[int]] = set()
    out: list[frozenset[int]] = []
    for s in family.sets:
        t = s & probe_set
        if t not in seen:
            seen.add(t)
            out.append(t)
    return SetFamily(family.universe, tuple(out))


def _check_vc_cap(family: SetFamily, cap: int) -> None:
    if family.universe.size > cap:
        raise ResourceCapError(
            f"universe size {family.universe.size} exceeds exhaustive cap {cap}; "
            "reduce the universe or sample probe sets externally"
        )


def vc_dimension(family: SetFamily, cap: int = VC_UNIVERSE_CAP) -> int:
    """Largest d such that some d-subset of the universe is shattered.

    Climbs the subset lattice: a shattered (d+1)-set has all its d-subsets
    shattered, so candidates at level d+1 extend level-d survivors upward.
    """
    if not family.sets:
        raise DomainError("vc_dimension requires a nonempty family")
    _check_vc_cap(family, cap)
    n = family.universe.size
    masks = family.masks
    distinct = len(set(masks))
    max_d = min(n, max(0, distinct.bit_length() - 1) + 1)

    def shattered(probe_mask: int, size: int) -> bool:
        return len({m & probe_mask for m in masks}) == 1 << size

    level = [(1 << i, i) for i in range(n) if shattered(1 << i, 1)]
    if not level:
        return 0
    d = 1
    while d < max_d:
        nxt = []
        for pm, top in level:
            for j in range(top + 1, n):
                cand = pm | (1 << j)
                if shattered(cand, d + 1):
                    nxt.append((cand, j))
        if not nxt:
            return d
        level = nxt
        d += 1
    return d


def shatter_function(family: SetFamily, k: int, cap: int = ENUM_CAP) -> int:
    """Max over k-subsets A of the number of distinct traces on A."""
    n = family.universe.size
    if not 0 <= k <= n:
        raise DomainError(f"k={k} out of range for universe size {n}")
    if k == 0:
        return 1
    if math.comb(n, k) * max(1, len(family.sets)) > cap:
        raise ResourceCapError(f"shatter_function({n} choose {k}) exceeds enumeration cap")
    masks = family.masks
    best = 0
    for idx in combinations(range(n), k):
        pm = sum(1 << i for i in idx)
        best = max(best, len({m & pm for m in masks}))
        if best == 1 << k:
            break
    return best


def max_trace_profile(family: SetFamily, cap: int = VC_UNIVERSE_CAP) -> list[int]:
    """profile[k] = shatter_function(family, k), computed in one vectorized sweep
    over all 2^n probe masks."""
    _check_vc_cap(family, cap)
    n = family.universe.size
    masks = np.array(family.masks, dtype=np.uint32)
    profile = np.zeros(n + 1, dtype=np.int64)
    total = 1 << n
    for lo in range(0, total, _SWEEP_CHUNK):
        probes = np.arange(lo, min(lo + _SWEEP_CHUNK, total), dtype=np.uint32)
        traced = probes[:, None] & masks[None, :]
        traced.sort(axis=1)
        distinct = 1 + np.count_nonzero(np.diff(traced, axis=1), axis=1)
        np.maximum.at(profile, np.bitwise_count(probes), distinct)
    return [int(x) for x in profile]


def sauer_check(family: SetFamily, cap: int = VC_UNIVERSE_CAP) -> bool:
    """True iff shatter_function(family, k) <= sum_{i<=d} C(k, i) for all k,
    where d = vc_dimension(family)."""
    profile = max_trace_profile(family, cap=cap)
    d = max(k for k, v in enumerate(profile) if v == 1 << k)
    for k, v in enumerate(profile):
        if v > sum(math.comb(k, i) for i in range(d + 1)):
            return False
    return True


# --- parametrized formulas and type spaces -------------------------------


@dataclass(frozen=True)
class ParametrizedFormula:
    """A total decidable predicate phi(x-tuple; y-tuple) over a carrier model.

    `batch`, when provided, evaluates one parameter tuple against a whole
    (T, object_arity) array of object tuples at once; it must agree with
    `eval_fn` pointwise.
    """

    name: str
    object_arity: int
    param_arity: int
    eval_fn: Callable[[object, tuple[int, ...], tuple[int, ...]], bool]
    batch: Optional[Callable[[object, np.ndarray, tuple[int, ...]], np.ndarray]] = None

    def __post_init__(self):
        if self.object_arity < 1 or self.param_arity < 1:
            raise DomainError("formula arities must be >= 1")

    def __call__(self, model, objs: tuple[int, ...], params: tuple[int, ...]) -> bool:
        return bool(self.eval_fn(model, objs, params))


@dataclass(frozen=True)
class SignVector:
    """Sign assignment over (parameter index, formula index) slots.

    bits holds one byte (0 or 1) per slot, laid out param-major:
    slot(i, j) = i * n_formulas + j.
    """

    bits: bytes
    n_params: int
    n_formulas: int

    def __post_init__(self):
        if len(self.bits) != self.n_params * self.n_formulas:
            raise DomainError("sign vector length does not match its index set")

    def bit(self, param_idx: int, formula_idx: int) -> int:
        if not (0 <= param_idx < self.n_params and 0 <= formula_idx < self.n_formulas):
            raise DomainError("sign vector index out of range")
        return self.bits[param_idx * self.n_formulas + formula_idx]

    def ones(self) -> frozenset[int]:
        """Slot indices assigned 1."""
        return frozenset(i for i, b in enumerate(self.bits) if b)


@dataclass(frozen=True)
class TypeSpace:
    """Deduplicated realized sign vectors of carrier tuples over B x formulas.

    `complete` is False when the space was sampled rather than enumerated; the
    count is then only a lower bound.
    """

    params: tuple[tuple[int, ...], ...]
    formula_names: tuple[str, ...]
    vectors: tuple[SignVector, ...]
    complete: bool = True

    @property
    def count(self) -> int:
        return len(self.vectors)

    def vector_set(self) -> frozenset[bytes]:
        return frozenset(v.bits for v in self.vectors)


def _tuple_count(carrier_size: int, arity: int) -> int:
    return carrier_size**arity


def _decode_tuple(index: int, carrier_size: int, arity: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        index, r = divmod(index, carrier_size)
        out.append(r)
    return tuple(reversed(out))


def _signs_reference(formulas, params, carrier, tuples) -> set[bytes]:
    rows: set[bytes] = set()
    for t in tuples:
        rows.add(
            bytes(
                1 if f.eval_fn(carrier, t, b) else 0
                for b in params
                for f in formulas
            )
        )
    return rows


def _signs_batched(formulas, params, carrier, n, arity, tuple_indices=None) -> set[bytes]:
    slots = len(params) * len(formulas)
    if tuple_indices is None:
        total = _tuple_count(n, arity)
        starts = range(0, total, _SWEEP_CHUNK)

        def chunk_objs(lo):
            hi = min(lo + _SWEEP_CHUNK, total)
            idx = np.arange(lo, hi, dtype=np.int64)
            objs = np.empty((hi - lo, arity), dtype=np.int64)
            for pos in range(arity - 1, -1, -1):
                objs[:, pos] = idx % n
                idx = idx // n
            return objs

    else:
        indices = np.asarray(tuple_indices, dtype=np.int64)
        starts = range(0, len(indices), _SWEEP_CHUNK)

        def chunk_objs(lo):
            idx = indices[lo : lo + _SWEEP_CHUNK].copy()
            objs = np.empty((len(idx), arity), dtype=np.int64)
            for pos in range(arity - 1, -1, -1):
                objs[:, pos] = idx % n
                idx = idx // n
            return objs

    packed_rows: set[bytes] = set()
    for lo in starts:
        objs = chunk_objs(lo)
        mat = np.empty((objs.shape[0], slots), dtype=np.uint8)
        col = 0
        for b in params:
            for f in formulas:
                mat[:, col] = f.batch(carrier, objs, b)
                col += 1
        packed = np.packbits(mat, axis=1)
        width = packed.shape[1]
        blob = packed.tobytes()
        packed_rows.update(blob[off : off + width] for off in range(0, len(blob), width))
    return {
        np.unpackbits(np.frombuffer(row, dtype=np.uint8), count=slots).tobytes()
        for row in packed_rows
    }


def type_space(
    formulas: Sequence[ParametrizedFormula],
    params: Sequence[tuple[int, ...]],
    carrier,
    object_arity: int,
    cap: int = ENUM_CAP,
    sample: Optional[int] = None,
    seed: int = 0,
) -> TypeSpace:
    """Realized type space of carrier `object_arity`-tuples over params x formulas.

    Raises ResourceCapError when a full enumeration would exceed `cap`
    evaluations; pass `sample` (a tuple budget) to fall back to a seeded
    sample, which yields a lower bound flagged with complete=False.
    """
    formulas = list(formulas)
    params = [tuple(b) for b in params]
    for f in formulas:
        if f.object_arity != object_arity:
            raise DomainError(f"formula {f.name} has object arity {f.object_arity}, expected {object_arity}")
    if params and formulas:
        pa = {f.param_arity for f in formulas}
        if len(pa) != 1:
            raise DomainError("formulas sharing a parameter set must share param arity")
        (pa,) = pa
        for b in params:
            if len(b) != pa:
                raise DomainError(f"parameter tuple {b} has arity {len(b)}, expected {pa}")
    n = carrier.size
    slots = len(params) * len(formulas)
    names = tuple(f.name for f in formulas)
    if slots == 0:
        vec = SignVector(b"", len(params), len(formulas))
        return TypeSpace(tuple(params), names, (vec,))

    total = _tuple_count(n, object_arity)
    evals = total * slots
    complete = True
    tuple_indices = None
    if evals > cap:
        if sample is None:
            raise ResourceCapError(
                f"enumerating {total} tuples x {slots} slots = {evals} evaluations "
                f"exceeds cap {cap}; pass sample=<tuple budget> for a flagged lower bound"
            )
        rng = Random(f"{seed}/type-space-sample")
        budget = min(sample, total)
        if total <= 8 * budget:
            tuple_indices = rng.sample(range(total), budget)
        else:
            tuple_indices = [rng.randrange(total) for _ in range(budget)]
        complete = False

    if all(f.batch is not None for f in formulas):
        rows = _signs_batched(formulas, params, carrier, n, object_arity, tuple_indices)
    else:
        if tuple_indices is None:
            tuples = product(range(n), repeat=object_arity)
        else:
            tuples = (_decode_tuple(i, n, object_arity) for i in tuple_indices)
        rows = _signs_reference(formulas, params, carrier, tuples)

    vectors = tuple(
        SignVector(r, len(params), len(formulas)) for r in sorted(rows)
    )
    return TypeSpace(tuple(params), names, vectors, complete)


# --- growth series and exponent fitting ----------------------------------


@dataclass(frozen=True)
class GrowthPoint:
    m: int
    count: int
    seed: int

    def __post_init__(self):
        if self.m < 2:
            raise DomainError(f"growth point needs m >= 2, got {self.m}")
        if self.count < 1:
            raise DomainError(f"growth point needs count >= 1, got {self.count}")


@dataclass(frozen=True)
class GrowthSeries:
    points: tuple[GrowthPoint, ...]
    fitted_exponent: Optional[float] = None

    def with_fit(self) -> "GrowthSeries":
        return GrowthSeries(self.points, fit_codensity_exponent(self).slope)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residuals: tuple[float, ...]


def fit_codensity_exponent(series: GrowthSeries) -> FitResult:
    """Least-squares slope of log(count) against log(m), with per-point residuals."""
    pts = series.points
    if len({p.m for p in pts}) < 3:
        raise DomainError("exponent fitting needs at least 3 distinct m values")
    xs = [math.log(p.m) for p in pts]
    ys = [math.log(p.count) for p in pts]
    xbar = sum(xs) / len(xs)
    ybar = sum(ys) / len(ys)
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    residuals = tuple(y - (intercept + slope * x) for x, y in zip(xs, ys))
    return FitResult(slope, intercept, residuals)
