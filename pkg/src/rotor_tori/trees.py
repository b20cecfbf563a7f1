"""Plane-tree expansion of the displacement coefficients.

Every order-k coefficient u_nu^(k) equals the sum of the values of all
labelled plane (ordered) rooted trees with k nodes whose root line carries
momentum nu.  Each node holds a mode from the support of f; the momentum of
a line is the sum of the modes at or below the node it exits; a line with
momentum x contributes a propagator 1/x^2 (1 at x = 0, allowed only on the
root line); a node with branching p contributes the multilinear factor
(1/p!) f_nu (i nu)^{p+1}.  Contracting the tensors top-down gives

    V(theta) = i^{2k-1} (prod_v f_{nu_v}/p_v!) nu_root
               (prod_{v != root} nu_{parent(v)} . nu_v) (prod_lines G),

which this module evaluates both on explicit tree structures (diagnostics,
cluster machinery) and through a flat dynamic programme over shared subtree
values (the production summation path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError, TruncationError
from .modes import FourierSeries, Frequency, Mode, Window, ZERO_MODE
from .smalldiv import BetaSequence, ScaleSequence, SCALE_ZERO, propagator, scale_of


class Tree:
    """Immutable labelled plane rooted tree; children order is meaningful."""

    __slots__ = ("mode", "children", "order", "momentum")

    def __init__(self, mode: Mode, children: tuple["Tree", ...] = ()):
        self.mode = mode
        self.children = tuple(children)
        self.order = 1 + sum(c.order for c in self.children)
        m = mode
        for c in self.children:
            m = m + c.momentum
        self.momentum = m

    @property
    def branching(self) -> int:
        return len(self.children)

    def shape(self) -> str:
        """Balanced-parenthesis serialization of the unlabelled shape."""
        return "(" + "".join(c.shape() for c in self.children) + ")"

    def nodes(self, prefix: tuple[int, ...] = ()):
        """Preorder (address, subtree) pairs; the address of the top is ()."""
        yield prefix, self
        for i, c in enumerate(self.children):
            yield from c.nodes(prefix + (i,))

    def at(self, address: tuple[int, ...]) -> "Tree":
        t = self
        for i in address:
            t = t.children[i]
        return t

    def __repr__(self):
        return f"Tree({self.mode.label()!r}, k={self.order}, momentum={self.momentum.label()!r})"


def branching_sum(t: Tree) -> int:
    """sum_v p_v; equals order - 1 for every tree."""
    return sum(sub.branching for _, sub in t.nodes())


def line_momenta(t: Tree) -> dict[tuple[int, ...], Mode]:
    """Momentum of every line, keyed by the address of the node it exits."""
    return {addr: sub.momentum for addr, sub in t.nodes()}


def line_scales(t: Tree, omega: Frequency, beta: BetaSequence,
                ms: ScaleSequence) -> dict[tuple[int, ...], object]:
    return {addr: scale_of(omega.dot(sub.momentum), beta, ms)
            for addr, sub in t.nodes()}


def tree_order_weight(t: Tree, w) -> float:
    """K(theta) = sum of the weighted norms of all node modes."""
    from .modes import star_norm
    return sum(star_norm(sub.mode, w) for _, sub in t.nodes())


# ---------------------------------------------------------------------------
# Structural enumeration
# ---------------------------------------------------------------------------

class _TreePool:
    """All labelled trees of a given order with nonzero internal momenta."""

    def __init__(self, support: list[Mode], cap: int | None):
        self.support = support
        self.cap = cap
        self.count = 0
        self.levels: dict[int, list[Tree]] = {}

    def _bump(self):
        self.count += 1
        if self.cap is not None and self.count > self.cap:
            raise ResourceLimitError(
                f"tree enumeration exceeded cap {self.cap}", partial_count=self.count)

    def level(self, k: int) -> list[Tree]:
        got = self.levels.get(k)
        if got is not None:
            return got
        out: list[Tree] = []
        if k == 1:
            for mode in self.support:
                self._bump()
                out.append(Tree(mode))
        else:
            child_lists = {kk: [t for t in self.level(kk) if t.momentum]
                           for kk in range(1, k)}
            from .lindstedt import compositions
            for mode in self.support:
                for p in range(1, k):
                    for comp in compositions(k - 1, p):
                        slots = [child_lists[kk] for kk in comp]

                        def rec(i: int, acc: list[Tree]):
                            if i == p:
                                self._bump()
                                out.append(Tree(mode, tuple(acc)))
                                return
                            for c in slots[i]:
                                acc.append(c)
                                rec(i + 1, acc)
                                acc.pop()

                        rec(0, [])
        self.levels[k] = out
        return out


def enumerate_trees(k: int, nu: Mode | None, f_support, cap: int | None = None):
    """Stream the labelled plane trees of order k with root momentum nu.

    Modes are drawn from f_support; trees with a zero momentum on any
    non-root line are skipped.  nu = None streams every root momentum.
    Deterministic order; a cap overflow raises ResourceLimitError.
    """
    if k < 1:
        raise DomainError("tree order must be at least 1")
    support = sorted(set(f_support), key=lambda m: m.entries)
    pool = _TreePool(support, cap)
    for t in pool.level(k):
        if nu is None or t.momentum == nu:
            yield t


def count_shapes(k: int) -> int:
    """Number of unlabelled plane rooted trees with k nodes (Catalan(k-1))."""
    return sum(1 for _ in enumerate_trees(k, None, [Mode.unit(0)]))


# ---------------------------------------------------------------------------
# Structural evaluation
# ---------------------------------------------------------------------------

@dataclass
class TreeValue:
    vector: np.ndarray


def _value(sub: Tree, f: FourierSeries, omega: Frequency, beta: BetaSequence,
           ms: ScaleSequence, window: Window, is_root: bool,
           skip_lines: set[tuple[int, ...]] | None, addr: tuple[int, ...]) -> np.ndarray:
    x = omega.dot(sub.momentum)
    if sub.momentum == ZERO_MODE:
        if not is_root:
            raise DomainError("zero momentum on a non-root line")
        g = 1.0
    else:
        n = scale_of(x, beta, ms)
        if n is None:
            raise TruncationError(
                f"line momentum {sub.momentum.label()} has divisor below the beta range")
        g = propagator(x, n, beta, ms)
    if skip_lines is not None and addr in skip_lines:
        g = 1.0
    p = sub.branching
    coeff = f.terms.get(sub.mode, 0j)
    scal = coeff * (1j ** (p + 1)) / math.factorial(p)
    mode_dense = sub.mode.dense(window)
    for i, c in enumerate(sub.children):
        child_vec = _value(c, f, omega, beta, ms, window, False, skip_lines, addr + (i,))
        scal = scal * complex(np.dot(mode_dense, child_vec))
    return (g * scal) * mode_dense


def tree_value(t: Tree, f: FourierSeries, omega: Frequency, beta: BetaSequence,
               ms: ScaleSequence, window: Window) -> TreeValue:
    """Value of one tree: ordered node-tensor contraction times propagators."""
    return TreeValue(_value(t, f, omega, beta, ms, window, True, None, ()))


def tree_value_skipping(t: Tree, f: FourierSeries, omega: Frequency,
                        beta: BetaSequence, ms: ScaleSequence, window: Window,
                        skip_lines: set[tuple[int, ...]]) -> TreeValue:
    """Tree value with the propagators of the listed lines replaced by 1."""
    return TreeValue(_value(t, f, omega, beta, ms, window, True, skip_lines, ()))


# ---------------------------------------------------------------------------
# Flat summation engine
# ---------------------------------------------------------------------------

class TreeEngine:
    """Sums labelled-tree values per order and root momentum.

    Subtree values are shared: level k holds one (momentum, divisor, value)
    entry per labelled tree, assembled from lower-level entries.  Entries
    with zero momentum or an exactly vanishing value cannot contribute to
    any coefficient and are dropped.
    """

    def __init__(self, f: FourierSeries, omega: Frequency, beta: BetaSequence,
                 ms: ScaleSequence, window: Window, cap: int | None = None):
        self.window = window
        self.cap = cap
        self.count = 0
        dim = window.dim
        self.dim = dim
        self.f_modes = []
        for nu0 in sorted(f.terms.keys(), key=lambda m: m.entries):
            if not nu0:
                continue
            dense = tuple(float(v) for v in nu0.dense(window))
            self.f_modes.append((dense, omega.dot(nu0), complex(f.terms[nu0])))
        self.min_divisor = 0.25 * beta(ms[ms.n_max])
        self._levels: list[list[tuple[tuple, float, tuple]]] = []
        self._sums: list[dict[tuple, tuple]] = []

    def _build_level(self, k: int) -> None:
        from .lindstedt import compositions
        dim = self.dim
        out: list[tuple[tuple, float, tuple]] = []
        sums: dict[tuple, list] = {}

        def emit(mom: tuple, x: float, vec: tuple):
            self.count += 1
            if self.cap is not None and self.count > self.cap:
                raise ResourceLimitError(
                    f"tree summation exceeded cap {self.cap}", partial_count=self.count)
            out.append((mom, x, vec))
            acc = sums.get(mom)
            if acc is None:
                sums[mom] = list(vec)
            else:
                for i in range(dim):
                    acc[i] += vec[i]

        if k == 1:
            for dense, x, coeff in self.f_modes:
                if abs(x) < self.min_divisor:
                    raise TruncationError("divisor below beta range at order 1")
                scal = 1j * coeff / (x * x)
                emit(dense, x, tuple(scal * d for d in dense))
        else:
            for dense, x0, coeff in self.f_modes:
                for p in range(1, k):
                    base = coeff * (1j ** (p + 1)) / math.factorial(p)
                    for comp in compositions(k - 1, p):
                        slots = [self._levels[kk - 1] for kk in comp]

                        def rec(i: int, mom: tuple, x: float, scal: complex):
                            if i == p:
                                if all(v == 0 for v in mom):
                                    return
                                if abs(x) < self.min_divisor:
                                    raise TruncationError(
                                        f"divisor below beta range at order {k}")
                                s = scal / (x * x)
                                if s == 0:
                                    return
                                emit(mom, x, tuple(s * d for d in dense))
                                return
                            for cm, cx, cv in slots[i]:
                                dot = 0j
                                for a in range(dim):
                                    da = dense[a]
                                    if da:
                                        dot += da * cv[a]
                                if dot == 0:
                                    continue
                                rec(i + 1,
                                    tuple(mom[a] + cm[a] for a in range(dim)),
                                    x + cx, scal * dot)

                        rec(0, dense, x0, base)
        self._levels.append(out)
        self._sums.append({m: tuple(v) for m, v in sums.items()})

    def coefficients(self, k: int) -> dict[tuple, tuple]:
        """Map dense-momentum -> summed coefficient vector at order k."""
        while len(self._levels) < k:
            self._build_level(len(self._levels) + 1)
        return self._sums[k - 1]

    def coefficient(self, k: int, nu: Mode) -> np.ndarray:
        key = tuple(float(v) for v in nu.dense(self.window))
        got = self.coefficients(k).get(key)
        if got is None:
            return np.zeros(self.dim, dtype=complex)
        return np.array(got, dtype=complex)


def sum_tree_values(k: int, nu: Mode, f: FourierSeries, omega: Frequency,
                    beta: BetaSequence, ms: ScaleSequence, window: Window,
                    engine: TreeEngine | None = None,
                    cap: int | None = None) -> np.ndarray:
    """Order-k coefficient at momentum nu as the sum over its trees."""
    if engine is None:
        engine = TreeEngine(f, omega, beta, ms, window, cap=cap)
    return engine.coefficient(k, nu)
