"""Cycle enumeration in weighted complete graphs and mean-gain checks.

The gain of a cycle is the product of its edge weights; a 2-cycle is an
unordered pair whose single edge is traversed twice, so its gain is the
squared weight.  With that convention every pair counts as one 2-cycle
(N = C(k,2)), while the closed-form cycle count C(k,r)(r-1)!/2 is used
for r >= 3 and, where a formula-consistent value is needed at r = 2,
halves to C(k,2)/2; both counts are exposed.

The central inequality checked here: the arithmetic mean of all length-r
cycle gains is at most ((sum of squared edge weights) / edge count)^(r/2),
with equality at uniform weights.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .distributions import philox_stream

__all__ = [
    "WeightedCompleteGraph",
    "pair_index",
    "enumerate_cycles",
    "cycle_count",
    "formula_cycle_count",
    "cycle_gain",
    "edge_incidence_counts",
    "MeanGainCheck",
    "check_mean_gain_bound",
    "ExpansionCheck",
    "check_expansion_identities",
]

ENUMERATION_MAX_VERTICES = 10
MEAN_GAIN_REL_TOL = 1e-12


def pair_index(k: int, i: int, j: int) -> int:
    """Position of the unordered pair (i, j), i < j, in lexicographic order."""
    if not 0 <= i < j < k:
        raise ValueError(f"need 0 <= i < j < k, got i={i}, j={j}, k={k}")
    return i * (2 * k - i - 1) // 2 + (j - i - 1)


class WeightedCompleteGraph:
    """Complete graph on k vertices with nonnegative edge weights.

    Weights are indexed by unordered pair (i, j), i < j, in lexicographic
    order, so the vector has length k(k-1)/2.
    """

    __slots__ = ("_k", "_weights")

    def __init__(self, k: int, weights):
        if k < 2:
            raise ValueError(f"need at least 2 vertices, got {k}")
        arr = np.asarray(weights, dtype=np.float64)
        expected = k * (k - 1) // 2
        if arr.shape != (expected,):
            raise ValueError(
                f"K_{k} needs {expected} edge weights, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("edge weights must be finite and nonnegative")
        arr = arr.copy()
        arr.flags.writeable = False
        self._k = int(k)
        self._weights = arr

    @property
    def k(self) -> int:
        return self._k

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def num_edges(self) -> int:
        return self._k * (self._k - 1) // 2

    def weight(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        return float(self._weights[pair_index(self._k, i, j)])

    def __repr__(self) -> str:
        return f"WeightedCompleteGraph(k={self._k})"


def _check_cycle_range(k: int, r: int) -> None:
    if not 2 <= r <= k:
        raise ValueError(f"need 2 <= r <= k, got r={r}, k={k}")
    if k > ENUMERATION_MAX_VERTICES:
        raise ValueError(
            f"cycle enumeration is limited to k <= {ENUMERATION_MAX_VERTICES}, "
            f"got k={k}")


@lru_cache(maxsize=None)
def enumerate_cycles(k: int, r: int) -> tuple[tuple[int, ...], ...]:
    """All simple length-r cycles of K_k, each once, in canonical form.

    Canonical form lists the smallest vertex first and orients the cycle
    so the second vertex is smaller than the last; generating only
    canonical orientations makes duplicates structurally impossible.
    For r = 2 every unordered pair is one cycle.
    """
    _check_cycle_range(k, r)
    if r == 2:
        return tuple((i, j) for i in range(k) for j in range(i + 1, k))
    out = []
    for combo in itertools.combinations(range(k), r):
        first = combo[0]
        rest = combo[1:]
        for perm in itertools.permutations(rest):
            if perm[0] < perm[-1]:
                out.append((first, *perm))
    return tuple(out)


def cycle_count(k: int, r: int) -> int:
    """Number of cycles produced by enumerate_cycles."""
    if not 2 <= r <= k:
        raise ValueError(f"need 2 <= r <= k, got r={r}, k={k}")
    if r == 2:
        return math.comb(k, 2)
    return math.comb(k, r) * math.factorial(r - 1) // 2


def formula_cycle_count(k: int, r: int) -> Fraction:
    """Closed-form count C(k,r)(r-1)!/2 as an exact rational.

    At r = 2 this is C(k,2)/2, half the enumeration convention; callers
    that need the closed-form chain (count ratios, incidence counts) use
    this value.
    """
    if not 2 <= r <= k:
        raise ValueError(f"need 2 <= r <= k, got r={r}, k={k}")
    return Fraction(math.comb(k, r) * math.factorial(r - 1), 2)


def cycle_gain(graph: WeightedCompleteGraph, cycle) -> float:
    """Product of the edge weights along a cycle; 2-cycles square their edge."""
    verts = tuple(int(v) for v in cycle)
    if any(not 0 <= v < graph.k for v in verts):
        raise ValueError(f"cycle vertices must lie in [0, {graph.k})")
    if len(set(verts)) != len(verts):
        raise ValueError("cycle vertices must be distinct")
    if len(verts) == 2:
        return graph.weight(verts[0], verts[1]) ** 2
    gain = 1.0
    for a, b in zip(verts, verts[1:]):
        gain *= graph.weight(a, b)
    gain *= graph.weight(verts[-1], verts[0])
    return gain


def _cycle_edge_indices(k: int, cycle: tuple[int, ...]) -> list[int]:
    if len(cycle) == 2:
        e = pair_index(k, cycle[0], cycle[1])
        return [e, e]  # traversed out and back
    edges = [pair_index(k, min(a, b), max(a, b))
             for a, b in zip(cycle, cycle[1:])]
    edges.append(pair_index(k, min(cycle[-1], cycle[0]), max(cycle[-1], cycle[0])))
    return edges


def edge_incidence_counts(k: int, r: int) -> np.ndarray:
    """Traversal count of each edge across all length-r cycles.

    Every edge is hit the same number of times: cycle_count(k,r) * r
    divided by the edge count (2-cycles contribute their edge twice).
    """
    counts = np.zeros(k * (k - 1) // 2, dtype=np.int64)
    for cycle in enumerate_cycles(k, r):
        for e in _cycle_edge_indices(k, cycle):
            counts[e] += 1
    return counts


@dataclass(frozen=True)
class MeanGainCheck:
    k: int
    r: int
    lhs: float  # arithmetic mean of cycle gains
    rhs: float  # ((sum of squared weights) / edge count)^(r/2)
    holds: bool


def check_mean_gain_bound(graph: WeightedCompleteGraph, r: int) -> MeanGainCheck:
    """Mean cycle gain versus the squared-weight power mean.

    holds is lhs <= rhs up to 1e-12 relative slack; uniform weights give
    exact equality.
    """
    cycles = enumerate_cycles(graph.k, r)
    total = 0.0
    for c in cycles:
        total += cycle_gain(graph, c)
    lhs = total / len(cycles)
    mean_sq = float((graph.weights * graph.weights).sum()) / graph.num_edges
    rhs = mean_sq ** (r / 2.0)
    holds = lhs <= rhs + MEAN_GAIN_REL_TOL * rhs
    return MeanGainCheck(k=graph.k, r=r, lhs=lhs, rhs=rhs, holds=holds)


@dataclass(frozen=True)
class ExpansionCheck:
    """Counting identities behind the mean-gain bound, for even r.

    Expanding incidence * (a_1^2 + ... + a_n^2)^(r/2) into unit-coefficient
    elements (incidence = cycles through one edge = N r / n):
      * total elements            = incidence * n^(r/2)
      * total degree of each edge = incidence * r * n^(r/2 - 1)
      * elements per cycle group  = r * n^(r/2 - 1)
    """
    k: int
    r: int
    num_edges: int
    incidence: int
    total_elements: int
    elements_ok: bool
    degree_per_edge: int
    degrees_ok: bool
    log_product_ok: bool
    group_size: int
    group_size_ok: bool

    @property
    def ok(self) -> bool:
        return (self.elements_ok and self.degrees_ok and self.log_product_ok
                and self.group_size_ok)


def check_expansion_identities(k: int, r: int, seed: int = 0) -> ExpansionCheck:
    """Verify the expansion counting identities by direct enumeration.

    The multinomial expansion is enumerated as ordered factor choices
    (one squared weight per factor), which is exactly the expansion into
    unit-coefficient elements.  The product identity is checked in log
    domain at seeded random positive weights.
    """
    if r % 2 != 0:
        raise ValueError(f"identities apply to even cycle lengths, got r={r}")
    if not 2 <= r <= k:
        raise ValueError(f"need 2 <= r <= k, got r={r}, k={k}")
    if k > 6:
        raise ValueError(f"expansion enumeration is limited to k <= 6, got k={k}")

    n = k * (k - 1) // 2
    count_formula = formula_cycle_count(k, r)
    incidence_frac = count_formula * r / n
    if incidence_frac.denominator != 1:
        raise ValueError(f"non-integer incidence for k={k}, r={r}")
    incidence = int(incidence_frac)
    half = r // 2

    # enumerate the n^(r/2) ordered factor choices once
    degree = np.zeros(n, dtype=np.int64)
    tuple_count = 0
    for choice in itertools.product(range(n), repeat=half):
        tuple_count += 1
        for e in choice:
            degree[e] += 2
    degree *= incidence
    total_elements = incidence * tuple_count

    expected_elements = incidence * n ** half
    expected_degree = incidence * r * n ** (half - 1)
    elements_ok = total_elements == expected_elements
    degrees_ok = bool(np.all(degree == expected_degree))

    # log-domain spot check of the product of all elements
    rng = philox_stream(seed, 1)
    w = rng.uniform(0.5, 2.0, size=n)
    logw = np.log(w)
    log_prod = 0.0
    for choice in itertools.product(range(n), repeat=half):
        log_prod += 2.0 * sum(logw[e] for e in choice)
    log_prod *= incidence
    expected_log = expected_degree * float(logw.sum())
    log_product_ok = math.isclose(log_prod, expected_log,
                                  rel_tol=1e-9, abs_tol=1e-9)

    group_frac = Fraction(total_elements) / count_formula
    expected_group = r * n ** (half - 1)
    group_size_ok = group_frac == expected_group

    return ExpansionCheck(
        k=k, r=r, num_edges=n, incidence=incidence,
        total_elements=total_elements, elements_ok=elements_ok,
        degree_per_edge=expected_degree, degrees_ok=degrees_ok,
        log_product_ok=log_product_ok,
        group_size=expected_group, group_size_ok=group_size_ok)
