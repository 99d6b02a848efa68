"""Concrete finite carrier models and the built-in formula corpus.

An ultrametric model is a rooted tree whose leaves form the carrier; the
subtree-leaf sets ("balls") are a directed family by construction, with
level-k balls playing the role of radii.  An order model is a finite total
order whose proper initial segments form a nested directed family.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from random import Random
from typing import Callable, Optional, Union

import numpy as np

from .errors import DomainError, ModelFormatError
from .forest import DirectedFamily
from .setsystem import ParametrizedFormula, SetFamily, Universe


@dataclass(frozen=True)
class UltrametricModel:
    """Rooted tree given as a parent array (root has parent -1); the carrier is
    the set of leaves, indexed in ascending node-id order."""

    parent: tuple[int, ...]
    seed: Optional[int] = None

    def __post_init__(self):
        n = len(self.parent)
        roots = [i for i, p in enumerate(self.parent) if p == -1]
        if len(roots) != 1:
            raise ModelFormatError(f"parent array must have exactly one root, found {len(roots)}")
        for i, p in enumerate(self.parent):
            if p != -1 and not 0 <= p < n:
                raise ModelFormatError(f"parent[{i}] = {p} out of range")
        # reachability from the root doubles as a cycle check
        if len(self._topo_order) != n:
            raise ModelFormatError("parent array contains a cycle or unreachable nodes")
        if len(self.leaves) < 2:
            raise ModelFormatError("ultrametric model needs at least 2 leaves")

    @cached_property
    def root(self) -> int:
        return next(i for i, p in enumerate(self.parent) if p == -1)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.parent]
        for i, p in enumerate(self.parent):
            if p != -1:
                kids[p].append(i)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def _topo_order(self) -> tuple[int, ...]:
        """Root first, parents before children."""
        out = [self.root]
        i = 0
        while i < len(out):
            out.extend(self.children[out[i]])
            i += 1
        return tuple(out)

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.parent)) if not self.children[i])

    @cached_property
    def leaf_index(self) -> dict[int, int]:
        return {node: i for i, node in enumerate(self.leaves)}

    @property
    def size(self) -> int:
        return len(self.leaves)

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        d = [0] * self.n_nodes
        for node in self._topo_order[1:]:
            d[node] = d[self.parent[node]] + 1
        return tuple(d)

    @cached_property
    def ball_masks(self) -> tuple[int, ...]:
        """Per node, the bitmask of carrier indices of leaves below it."""
        masks = [0] * self.n_nodes
        for node in reversed(self._topo_order):
            if not self.children[node]:
                masks[node] = 1 << self.leaf_index[node]
            else:
                acc = 0
                for c in self.children[node]:
                    acc |= masks[c]
                masks[node] = acc
        return tuple(masks)

    def ball(self, node: int) -> frozenset[int]:
        m = self.ball_masks[node]
        return frozenset(i for i in range(self.size) if m >> i & 1)

    def ancestor_up(self, node: int, k: int) -> int:
        """Ancestor k levels above node, clamped at the root."""
        for _ in range(k):
            p = self.parent[node]
            if p == -1:
                break
            node = p
        return node

    def lca(self, a: int, b: int) -> int:
        da, db = self.depth[a], self.depth[b]
        while da > db:
            a, da = self.parent[a], da - 1
        while db > da:
            b, db = self.parent[b], db - 1
        while a != b:
            a, b = self.parent[a], self.parent[b]
        return a

    @property
    def label(self) -> str:
        return f"ultrametric-L{self.size}-s{self.seed}"

    # cached numpy views used by batched formula evaluation

    @cached_property
    def ball_bool(self) -> np.ndarray:
        mat = np.zeros((self.n_nodes, self.size), dtype=bool)
        for node, m in enumerate(self.ball_masks):
            for i in range(self.size):
                if m >> i & 1:
                    mat[node, i] = True
        return mat

    @cached_property
    def lca_node_matrix(self) -> np.ndarray:
        """(L, L) matrix: lca node id of the leaves at carrier indices (i, j)."""
        mat = np.full((self.size, self.size), self.root, dtype=np.int32)
        for node in self._topo_order:
            if node == self.root:
                continue
            idx = np.flatnonzero(self.ball_bool[node])
            mat[np.ix_(idx, idx)] = node
        return mat

    @cached_property
    def _anc_arrays(self) -> dict[int, np.ndarray]:
        return {}

    def ancestor_array(self, k: int) -> np.ndarray:
        """Per carrier index, the node id k levels above its leaf."""
        if k not in self._anc_arrays:
            self._anc_arrays[k] = np.array(
                [self.ancestor_up(leaf, k) for leaf in self.leaves], dtype=np.int32
            )
        return self._anc_arrays[k]

    def ancestor_membership(self, carrier_idx: int) -> np.ndarray:
        """Bool per node: is the node an ancestor-or-self of this leaf."""
        mem = np.zeros(self.n_nodes, dtype=bool)
        node = self.leaves[carrier_idx]
        while node != -1:
            mem[node] = True
            node = self.parent[node]
        return mem


@dataclass(frozen=True)
class OrderModel:
    """Finite total order 0 < 1 < ... < size-1."""

    size: int
    seed: Optional[int] = None

    def __post_init__(self):
        Universe(self.size)  # range validation

    @property
    def label(self) -> str:
        return f"order-N{self.size}-s{self.seed}"


CarrierModel = Union[UltrametricModel, OrderModel]


def random_ultrametric(leaf_count: int, max_branching: int, seed: int) -> UltrametricModel:
    """Seed-deterministic rooted tree with exactly leaf_count leaves and
    branching factors between 2 and max_branching."""
    if leaf_count < 2:
        raise DomainError(f"leaf_count must be >= 2, got {leaf_count}")
    if max_branching < 2:
        raise DomainError(f"max_branching must be >= 2, got {max_branching}")
    rng = Random(f"ultrametric/{leaf_count}/{max_branching}/{seed}")
    parent: list[int] = []
    stack = [(leaf_count, -1)]
    while stack:
        n_leaves, par = stack.pop()
        node = len(parent)
        parent.append(par)
        if n_leaves == 1:
            continue
        b = rng.randint(2, min(max_branching, n_leaves))
        cuts = sorted(rng.sample(range(1, n_leaves), b - 1))
        sizes = [hi - lo for lo, hi in zip([0] + cuts, cuts + [n_leaves])]
        stack.extend((s, node) for s in reversed(sizes))
    return UltrametricModel(tuple(parent), seed=seed)


def ball_family(model: UltrametricModel) -> DirectedFamily:
    """The family {ball(v) : v a tree node}, indexed by node id; directed by
    construction."""
    fam = SetFamily(
        Universe(model.size), tuple(model.ball(v) for v in range(model.n_nodes))
    )
    return DirectedFamily(fam)


def order_family(model: OrderModel, include_empty: bool = False) -> DirectedFamily:
    """Proper initial segments {x : x < c}, indexed by cut point."""
    cuts = range(0 if include_empty else 1, model.size)
    fam = SetFamily(
        Universe(model.size), tuple(frozenset(range(c)) for c in cuts)
    )
    return DirectedFamily(fam)


# --- built-in formula corpus ----------------------------------------------


@dataclass(frozen=True)
class UBallFormula:
    """A formula together with a certificate decomposing (the certified part
    of) each instance into at most max_components balls of the model."""

    base: ParametrizedFormula
    certified_part: ParametrizedFormula
    max_components: int
    components_of: Callable[[UltrametricModel, tuple[int, ...]], tuple[frozenset[int], ...]]

    @property
    def name(self) -> str:
        return self.base.name


def _merge_two_balls(
    model: UltrametricModel, n0: int, n1: int
) -> tuple[frozenset[int], ...]:
    """Minimal ball decomposition of ball(n0) | ball(n1): nested pairs collapse,
    and two disjoint balls that exactly pack their lca's ball collapse to it."""
    b0, b1 = model.ball(n0), model.ball(n1)
    if b0 <= b1:
        return (b1,)
    if b1 <= b0:
        return (b0,)
    lca_ball = model.ball(model.lca(n0, n1))
    if lca_ball == b0 | b1:
        return (lca_ball,)
    return tuple(sorted((b0, b1), key=lambda s: (min(s), len(s))))


def _lca_ball_natural() -> ParametrizedFormula:
    def ev(model, x, y):
        node = model.lca(model.leaves[y[0]], model.leaves[y[1]])
        return bool(model.ball_masks[node] >> x[0] & 1)

    def bat(model, objs, y):
        node = model.lca(model.leaves[y[0]], model.leaves[y[1]])
        return model.ball_bool[node][objs[:, 0]]

    return ParametrizedFormula("lca-ball", 1, 2, ev, bat)


def _twin_ball_natural(k: int) -> ParametrizedFormula:
    def ev(model, x, y):
        n0 = model.ancestor_up(model.leaves[y[0]], k)
        n1 = model.ancestor_up(model.leaves[y[1]], k)
        return bool((model.ball_masks[n0] | model.ball_masks[n1]) >> x[0] & 1)

    def bat(model, objs, y):
        n0 = model.ancestor_up(model.leaves[y[0]], k)
        n1 = model.ancestor_up(model.leaves[y[1]], k)
        return (model.ball_bool[n0] | model.ball_bool[n1])[objs[:, 0]]

    return ParametrizedFormula(f"twin-ball-{k}", 1, 2, ev, bat)


def _boolean_mix_natural(k: int, j: int) -> ParametrizedFormula:
    def ev(model, x, y):
        pos = model.ancestor_up(model.leaves[y[0]], k)
        neg = model.ancestor_up(model.leaves[y[1]], j)
        return bool(model.ball_masks[pos] >> x[0] & 1) and not bool(
            model.ball_masks[neg] >> x[0] & 1
        )

    def bat(model, objs, y):
        pos = model.ancestor_up(model.leaves[y[0]], k)
        neg = model.ancestor_up(model.leaves[y[1]], j)
        return (model.ball_bool[pos] & ~model.ball_bool[neg])[objs[:, 0]]

    return ParametrizedFormula(f"boolean-mix-{k}-{j}", 1, 2, ev, bat)


def builtin_formulas(model: UltrametricModel, kind: str) -> list[UBallFormula]:
    """The u-ball corpus over an ultrametric model.

    lca-ball: x in the ball at lca(y0, y1) (one component).
    twin-ball-k: x in ball_k(y0) | ball_k(y1), where ball_k(b) sits k levels
        above the leaf b, clamped at the root (at most two components;
        duplicates and nested pairs merge).
    boolean-mix: x in ball_2(y0) and not in ball_1(y1); the certificate covers
        the positive conjunct.
    """
    if kind == "lca-ball":
        f = _lca_ball_natural()

        def comps(model, y):
            node = model.lca(model.leaves[y[0]], model.leaves[y[1]])
            return (model.ball(node),)

        return [UBallFormula(f, f, 1, comps)]
    if kind == "twin-ball-k":
        out = []
        for k in (0, 1, 2):
            f = _twin_ball_natural(k)

            def comps(model, y, k=k):
                n0 = model.ancestor_up(model.leaves[y[0]], k)
                n1 = model.ancestor_up(model.leaves[y[1]], k)
                return _merge_two_balls(model, n0, n1)

            out.append(UBallFormula(f, f, 2, comps))
        return out
    if kind == "boolean-mix":
        f = _boolean_mix_natural(2, 1)
        pos = _twin_ball_natural(2)

        def comps(model, y):
            return (model.ball(model.ancestor_up(model.leaves[y[0]], 2)),)

        # the certified part is the positive conjunct: twin-ball-2 at (y0, y0)
        def part_ev(model, x, y):
            return pos.eval_fn(model, x, (y[0], y[0]))

        def part_bat(model, objs, y):
            return pos.batch(model, objs, (y[0], y[0]))

        part = ParametrizedFormula("boolean-mix-2-1-positive", 1, 2, part_ev, part_bat)
        return [UBallFormula(f, part, 1, comps)]
    raise DomainError(f"unknown formula kind {kind!r}")


# --- formulas at the growth harness's two partitions ----------------------


def _lca_ball_opp() -> ParametrizedFormula:
    def ev(model, v, u):
        node = model.lca(model.leaves[v[0]], model.leaves[v[1]])
        return bool(model.ball_masks[node] >> u[0] & 1)

    def bat(model, objs, u):
        amem = model.ancestor_membership(u[0])
        return amem[model.lca_node_matrix[objs[:, 0], objs[:, 1]]]

    return ParametrizedFormula("lca-ball", 2, 1, ev, bat)


def _twin_ball_opp(k: int) -> ParametrizedFormula:
    def ev(model, v, u):
        n0 = model.ancestor_up(model.leaves[v[0]], k)
        n1 = model.ancestor_up(model.leaves[v[1]], k)
        return bool((model.ball_masks[n0] | model.ball_masks[n1]) >> u[0] & 1)

    def bat(model, objs, u):
        g = model.ancestor_membership(u[0])[model.ancestor_array(k)]
        return g[objs[:, 0]] | g[objs[:, 1]]

    return ParametrizedFormula(f"twin-ball-{k}", 2, 1, ev, bat)


def _boolean_mix_opp(k: int, j: int) -> ParametrizedFormula:
    def ev(model, v, u):
        pos = model.ancestor_up(model.leaves[v[0]], k)
        neg = model.ancestor_up(model.leaves[v[1]], j)
        return bool(model.ball_masks[pos] >> u[0] & 1) and not bool(
            model.ball_masks[neg] >> u[0] & 1
        )

    def bat(model, objs, u):
        amem = model.ancestor_membership(u[0])
        gk = amem[model.ancestor_array(k)]
        gj = amem[model.ancestor_array(j)]
        return gk[objs[:, 0]] & ~gj[objs[:, 1]]

    return ParametrizedFormula(f"boolean-mix-{k}-{j}", 2, 1, ev, bat)


def pair_equality_formula() -> ParametrizedFormula:
    """(x0 = y or x1 = y): the classical quadratic-growth witness at object
    arity 2."""

    def ev(model, x, y):
        return x[0] == y[0] or x[1] == y[0]

    def bat(model, objs, y):
        return (objs[:, 0] == y[0]) | (objs[:, 1] == y[0])

    return ParametrizedFormula("pair-equality", 2, 1, ev, bat)


GROWTH_KINDS = ("lca-ball", "twin-ball-0", "twin-ball-1", "twin-ball-2", "boolean-mix", "pair-equality")


def growth_formula(kind: str, arity: int) -> ParametrizedFormula:
    """The formula for a growth run, partitioned for the requested object arity.

    At arity 1 the corpus formulas keep their natural partition (object x,
    parameter pair); at arity 2 the roles are exchanged, so the pair side is
    the object and single carrier elements are the parameters.
    """
    if arity not in (1, 2):
        raise DomainError(f"object arity must be 1 or 2, got {arity}")
    if kind == "pair-equality":
        if arity != 2:
            raise DomainError("pair-equality is an arity-2 formula")
        return pair_equality_formula()
    if kind == "lca-ball":
        return _lca_ball_natural() if arity == 1 else _lca_ball_opp()
    if kind.startswith("twin-ball-"):
        k = int(kind.rsplit("-", 1)[1])
        return _twin_ball_natural(k) if arity == 1 else _twin_ball_opp(k)
    if kind == "boolean-mix":
        return _boolean_mix_natural(2, 1) if arity == 1 else _boolean_mix_opp(2, 1)
    raise DomainError(f"unknown formula kind {kind!r}")


# --- model files -----------------------------------------------------------


def save_model(model: Union[CarrierModel, SetFamily], path) -> None:
    if isinstance(model, UltrametricModel):
        doc = {"kind": "ultrametric", "parent": list(model.parent), "seed": model.seed}
    elif isinstance(model, OrderModel):
        doc = {"kind": "order", "size": model.size, "seed": model.seed}
    elif isinstance(model, SetFamily):
        doc = {
            "kind": "family",
            "universe": model.universe.size,
            "sets": [sorted(s) for s in model.sets],
        }
    else:
        raise DomainError(f"cannot save object of type {type(model).__name__}")
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> Union[CarrierModel, SetFamily]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{path}: malformed JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ModelFormatError(f"{path}: expected an object with a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == "ultrametric":
            return UltrametricModel(tuple(doc["parent"]), seed=doc.get("seed"))
        if kind == "order":
            return OrderModel(int(doc["size"]), seed=doc.get("seed"))
        if kind == "family":
            return SetFamily.of(int(doc["universe"]), doc["sets"])
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"{path}: {e}") from e
    raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
