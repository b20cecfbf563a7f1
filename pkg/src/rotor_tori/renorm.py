"""Resonant clusters, cluster operators and self-energy cancellations.

A resonant cluster is a connected subgraph T of a tree with one entering
and one exiting line carrying equal momenta, total node-mode weight K(T)
small compared with the scale of its external lines, and all internal
scales strictly below the external one.  Such subgraphs are the mechanism
by which small divisors accumulate along chains.

Cutting the entering line and treating the entering momentum's divisor as
a free variable x turns a cluster into a linear operator W_T(x) on window
vectors; summing W_T(x) over all clusters of a given order whose internal
scales sit below n gives the self-energy M_n^(k)(x).  Both M_n^(k)(0) and
its first x-derivative vanish: the first cancellation holds tree by tree
(the node-mode sum of a zero-momentum tree vanishes), the second pairs
trees with reversed attachment.  This module computes all of it
numerically and reports the cancellation ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResonanceError, TruncationError
from .modes import FourierSeries, Frequency, Mode, WeightSequence, Window, ZERO_MODE, star_norm
from .smalldiv import BetaSequence, ScaleSequence, scale_of
from .trees import Tree, enumerate_trees, tree_value_skipping

Address = tuple[int, ...]


def _is_prefix(a: Address, b: Address) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


# ---------------------------------------------------------------------------
# Cluster detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResonantCluster:
    """A detected cluster inside a host tree.

    Lines are addressed by the node they exit; the exiting line is the line
    of `exit_addr`, the entering line is the line of `enter_addr` (a strict
    descendant).  `nodes` are the member-node addresses, `internal_lines`
    the member lines, `path_lines` the lines between the exit node and the
    node the entering line feeds."""

    exit_addr: Address
    enter_addr: Address
    nodes: tuple[Address, ...]
    internal_lines: tuple[Address, ...]
    path_lines: tuple[Address, ...]
    weight: float          # K(T): summed node-mode norms
    scale_internal: int    # max internal scale (-1 when no internal lines)
    scale_external: int    # min of the two external line scales


@dataclass(frozen=True)
class ClusterLabeling:
    clusters: tuple[ResonantCluster, ...]
    resonant_lines: frozenset[Address]


def find_resonant_clusters(t: Tree, w: WeightSequence, omega: Frequency,
                           beta: BetaSequence, ms: ScaleSequence) -> ClusterLabeling:
    """All (exit line, entering line) subgraphs meeting the cluster rules.

    Every line exiting some cluster is labelled resonant."""
    info = list(t.nodes())
    momenta = {addr: sub.momentum for addr, sub in info}
    scales = {addr: scale_of(omega.dot(sub.momentum), beta, ms) for addr, sub in info}
    weights = {addr: star_norm(sub.mode, w) for addr, sub in info}
    out: list[ResonantCluster] = []
    addrs = [addr for addr, _ in info]
    for exit_addr in addrs:
        for enter_addr in addrs:
            if enter_addr == exit_addr or not _is_prefix(exit_addr, enter_addr):
                continue
            if momenta[exit_addr] != momenta[enter_addr]:
                continue
            n_exit, n_enter = scales[exit_addr], scales[enter_addr]
            if not isinstance(n_exit, int) or not isinstance(n_enter, int):
                continue  # zero or out-of-range external divisor: not a cluster
            n_ext = min(n_exit, n_enter)
            nodes = tuple(a for a in addrs
                          if _is_prefix(exit_addr, a) and not _is_prefix(enter_addr, a))
            internal = tuple(a for a in nodes if a != exit_addr)
            n_int = -1
            ok = True
            for a in internal:
                s = scales[a]
                if not isinstance(s, int):
                    raise TruncationError("internal line scale outside computed range")
                n_int = max(n_int, s)
                if n_int >= n_ext:
                    ok = False
                    break
            if not ok:
                continue
            weight = sum(weights[a] for a in nodes)
            if weight >= 2.0 ** (ms[n_ext] - 1):
                continue
            path = tuple(enter_addr[:i] for i in range(1 + len(exit_addr), len(enter_addr)))
            out.append(ResonantCluster(exit_addr, enter_addr, nodes, internal, path,
                                       weight, n_int, n_ext))
    resonant = frozenset(c.exit_addr for c in out)
    return ClusterLabeling(tuple(out), resonant)


def nonresonant_count(t: Tree, n: int, labeling: ClusterLabeling, omega: Frequency,
                      beta: BetaSequence, ms: ScaleSequence) -> int:
    """Number of non-resonant lines whose scale is at least n."""
    count = 0
    for addr, sub in t.nodes():
        if addr in labeling.resonant_lines:
            continue
        s = scale_of(omega.dot(sub.momentum), beta, ms)
        if isinstance(s, int) and s >= n:
            count += 1
    return count


def nonresonant_value(t: Tree, f: FourierSeries, omega: Frequency,
                      beta: BetaSequence, ms: ScaleSequence, window: Window,
                      labeling: ClusterLabeling) -> np.ndarray:
    """Tree value with the propagators of resonant lines removed."""
    return tree_value_skipping(t, f, omega, beta, ms, window,
                               set(labeling.resonant_lines)).vector


# ---------------------------------------------------------------------------
# Operator assembly
# ---------------------------------------------------------------------------

@dataclass
class LinearKernel:
    """Dense complex operator on window components."""

    matrix: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def apply(self, z: np.ndarray) -> np.ndarray:
        return self.matrix @ z

    def __add__(self, other: "LinearKernel") -> "LinearKernel":
        return LinearKernel(self.matrix + other.matrix)


def _assemble_terms(sub: Tree, entered: Address, excluded: Address | None,
                    f: FourierSeries, omega: Frequency, window: Window,
                    indicator, x: float, max_deriv: int):
    """Derivative table of one cluster contribution.

    `sub` is the subtree hanging from the exiting line; `entered` addresses
    the node receiving the entering line; `excluded` (if given) is the
    entering subtree to strip.  `indicator(addr, xi)` gates each internal
    line's propagator.  Returns (d0, d1, d2) matrices up to `max_deriv`.
    """
    nodes: list[tuple[Address, Tree]] = []
    stripped: dict[Address, Mode] = {}

    def walk(addr: Address, node: Tree) -> Mode | None:
        if excluded is not None and addr == excluded:
            return None
        nodes.append((addr, node))
        mom = node.mode
        for i, c in enumerate(node.children):
            r = walk(addr + (i,), c)
            if r is not None:
                mom = mom + r
        stripped[addr] = mom
        return mom

    walk((), sub)

    k_t = len(nodes)
    scal = 1j ** (2 * k_t - 1)
    by_addr = dict(nodes)
    for addr, node in nodes:
        coeff = f.terms.get(node.mode, 0j)
        scal *= coeff / math.factorial(node.branching)
        if addr:
            parent = by_addr[addr[:-1]]
            scal *= parent.mode.dot(node.mode)
        if scal == 0:
            break

    dim = window.dim
    zero = np.zeros((dim, dim), dtype=complex)
    if scal == 0:
        return [zero.copy() for _ in range(max_deriv + 1)]

    path = {entered[:i] for i in range(1, len(entered) + 1)}
    p0, p1, p2 = 1.0, 0.0, 0.0
    for addr, _ in nodes:
        if not addr:
            continue  # the exiting line carries no factor here
        xi = omega.dot(stripped[addr]) + (x if addr in path else 0.0)
        if xi == 0.0:
            raise ResonanceError(f"singular internal divisor at line {addr}")
        ind = 1.0 if indicator(addr, xi) else 0.0
        g0 = ind / (xi * xi)
        if addr in path:
            g1 = -2.0 * ind / xi ** 3
            g2 = 6.0 * ind / xi ** 4
        else:
            g1 = g2 = 0.0
        p0, p1, p2 = (p0 * g0,
                      p1 * g0 + p0 * g1,
                      p2 * g0 + 2.0 * p1 * g1 + p0 * g2)

    out_vec = sub.mode.dense(window)
    z_vec = 1j * by_addr[entered].mode.dense(window)
    base = np.outer(scal * out_vec, z_vec)
    return [base * (p0, p1, p2)[d] for d in range(max_deriv + 1)]


def cluster_operator(host: Tree, cluster: ResonantCluster, x: float,
                     f: FourierSeries, omega: Frequency, beta: BetaSequence,
                     ms: ScaleSequence, window: Window,
                     derivative_order: int = 0) -> LinearKernel:
    """W_T(x) (or an x-derivative) for a cluster found in a host tree.

    Internal propagators keep the host's derived scale labels: the factor
    of line l is [scale(xi_l(x)) = n_l] / xi_l(x)^2, where xi adds x to the
    stripped divisor on path lines.  Derivatives act on the power factors
    only, never on the scale indicators."""
    if derivative_order not in (0, 1, 2):
        raise DomainError("derivative order must be 0, 1 or 2")
    sub = host.at(cluster.exit_addr)
    rel = len(cluster.exit_addr)
    enter_rel = cluster.enter_addr[rel:]
    entered = enter_rel[:-1]
    host_scales = {addr: scale_of(omega.dot(node.momentum), beta, ms)
                   for addr, node in sub.nodes()}

    def indicator(addr: Address, xi: float) -> bool:
        return scale_of(xi, beta, ms) == host_scales[addr]

    terms = _assemble_terms(sub, entered, enter_rel, f, omega, window,
                            indicator, x, derivative_order)
    return LinearKernel(terms[derivative_order])


# ---------------------------------------------------------------------------
# Self-energy
# ---------------------------------------------------------------------------

def _zero_momentum_trees(k: int, n: int, f: FourierSeries, omega: Frequency,
                         beta: BetaSequence, ms: ScaleSequence,
                         cap: int | None) -> list[Tree]:
    """Trees of order k, root momentum zero, all internal scales below n."""
    out = []
    for t in enumerate_trees(k, ZERO_MODE, list(f.terms.keys()), cap=cap):
        ok = True
        for addr, sub in t.nodes():
            if not addr:
                continue
            s = scale_of(omega.dot(sub.momentum), beta, ms)
            if not (isinstance(s, int) and s < n):
                ok = False
                break
        if ok:
            out.append(t)
    return out


def self_energy_terms(k: int, n: int, x: float, f: FourierSeries, omega: Frequency,
                      beta: BetaSequence, ms: ScaleSequence, window: Window,
                      max_deriv: int = 0, cap: int | None = None):
    """Per-(tree, attachment) contributions to M_n^(k)(x) and derivatives.

    Every zero-momentum tree of order k below scale n receives an entering
    line of symbol divisor x at each of its nodes; the attachment raises
    that node's tensor rank.  Summing the ordered insertion positions
    collapses to the host node factor, so each (tree, node) pair is emitted
    once.  Internal lines carry the cut propagator
    [scale(xi) < n] / xi^2."""
    if k < 1:
        raise DomainError("order must be at least 1")
    if n < 1 or n > ms.n_max + 1:
        raise DomainError(f"scale cut {n} outside the computed range")

    def indicator(addr: Address, xi: float) -> bool:
        s = scale_of(xi, beta, ms)
        return isinstance(s, int) and s < n

    for t in _zero_momentum_trees(k, n, f, omega, beta, ms, cap):
        for addr, _ in t.nodes():
            yield _assemble_terms(t, addr, None, f, omega, window,
                                  indicator, x, max_deriv)


def self_energy(k: int, n: int, x: float, f: FourierSeries, omega: Frequency,
                beta: BetaSequence, ms: ScaleSequence, window: Window,
                derivative_order: int = 0, cap: int | None = None) -> LinearKernel:
    """M_n^(k)(x) (or an x-derivative) as a window operator."""
    if derivative_order not in (0, 1, 2):
        raise DomainError("derivative order must be 0, 1 or 2")
    dim = window.dim
    total = np.zeros((dim, dim), dtype=complex)
    for terms in self_energy_terms(k, n, x, f, omega, beta, ms, window,
                                   max_deriv=derivative_order, cap=cap):
        total += terms[derivative_order]
    return LinearKernel(total)


def taylor_remainder(k: int, n: int, x: float, f: FourierSeries, omega: Frequency,
                     beta: BetaSequence, ms: ScaleSequence, window: Window,
                     cap: int | None = None) -> LinearKernel:
    """R_n^(k)(x) = (M(x) - M(0) - x dM(0)) / x^2."""
    if x == 0.0:
        raise DomainError("remainder needs x != 0")
    m_x = self_energy(k, n, x, f, omega, beta, ms, window, 0, cap)
    m_0 = self_energy(k, n, 0.0, f, omega, beta, ms, window, 0, cap)
    dm_0 = self_energy(k, n, 0.0, f, omega, beta, ms, window, 1, cap)
    return LinearKernel((m_x.matrix - m_0.matrix - x * dm_0.matrix) / (x * x))


# ---------------------------------------------------------------------------
# Cancellation report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CancellationRow:
    k: int
    n: int
    norm_m0: float
    norm_dm0: float
    raw_scale: float       # summed term norms at derivative order 0
    raw_scale_d1: float    # summed term norms at derivative order 1
    ratio0: float
    ratio1: float
    remainder_x: float
    remainder_norm: float


def realized_scale_cuts(k: int, f: FourierSeries, omega: Frequency,
                        beta: BetaSequence, ms: ScaleSequence,
                        cap: int | None = None) -> list[int]:
    """Scale cuts n for which order-k self-energies have content: one above
    each realized internal scale of the zero-momentum trees."""
    seen: set[int] = set()
    for t in enumerate_trees(k, ZERO_MODE, list(f.terms.keys()), cap=cap):
        scales = []
        ok = True
        for addr, sub in t.nodes():
            if not addr:
                continue
            s = scale_of(omega.dot(sub.momentum), beta, ms)
            if not isinstance(s, int):
                ok = False
                break
            scales.append(s)
        if ok and scales:
            seen.add(max(scales) + 1)
    return sorted(n for n in seen if n <= ms.n_max + 1)


def cancellation_report(k_max: int, f: FourierSeries, omega: Frequency,
                        beta: BetaSequence, ms: ScaleSequence, window: Window,
                        cap: int | None = None) -> list[CancellationRow]:
    """Cancellation ratios for every order k <= k_max and realized scale cut.

    Ratios are relative: operator norms of the summed self-energy (and its
    x-derivative) divided by the summed norms of their individual terms, so
    a clean cancellation shows up at rounding level regardless of the raw
    magnitude."""
    rows = []
    for k in range(1, k_max + 1):
        cuts = realized_scale_cuts(k, f, omega, beta, ms, cap) or [1]
        for n in cuts:
            dim = window.dim
            m0 = np.zeros((dim, dim), dtype=complex)
            dm0 = np.zeros((dim, dim), dtype=complex)
            raw0 = raw1 = 0.0
            for terms in self_energy_terms(k, n, 0.0, f, omega, beta, ms, window,
                                           max_deriv=1, cap=cap):
                m0 += terms[0]
                dm0 += terms[1]
                raw0 += float(np.linalg.norm(terms[0], 2))
                raw1 += float(np.linalg.norm(terms[1], 2))
            x_sample = 0.2 * beta(ms[n - 1]) if n - 1 <= ms.n_max else 0.2 * beta(ms[ms.n_max])
            rem = taylor_remainder(k, n, x_sample, f, omega, beta, ms, window, cap)
            norm_m0 = float(np.linalg.norm(m0, 2))
            norm_dm0 = float(np.linalg.norm(dm0, 2))
            rows.append(CancellationRow(
                k, n, norm_m0, norm_dm0, raw0, raw1,
                norm_m0 / raw0 if raw0 > 0 else 0.0,
                norm_dm0 / raw1 if raw1 > 0 else 0.0,
                x_sample, rem.norm()))
    return rows
