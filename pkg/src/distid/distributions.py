"""Finite-alphabet distributions, Bhattacharyya geometry, and seeded sampling.

Symbols are dense integer indices 0..m-1; there is no named-alphabet
mapping.  All values are immutable after construction and safe to share
across threads; sampling is a pure function of (pmf, n, seed).
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FinitePmf",
    "DistributionFamily",
    "ObservationBatch",
    "bhattacharyya",
    "tilted_midpoint",
    "kl_divergence",
    "sample_sequence",
    "make_family",
    "philox_stream",
]

# Sum-to-one tolerance for pmfs and the sup-norm distinctness tolerance for
# family members.  Exact distinctness is not testable in floating point, so
# members closer than DISTINCT_TOL are rejected as duplicates.
NORMALIZATION_TOL = 1e-12
DISTINCT_TOL = 1e-9

_U64_MAX = 2**64 - 1


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
    if not 0 <= seed <= _U64_MAX:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return int(seed)


def philox_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent counter-based generator for (seed, stream).

    Distinct stream indices under the same seed give statistically
    independent streams, so per-trial randomness can be derived without
    any sequential state (this is what makes parallel Monte Carlo
    reproducible for any worker count).
    """
    _check_seed(seed)
    if not 0 <= stream <= _U64_MAX:
        raise ValueError(f"stream index out of range: {stream}")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class FinitePmf:
    """A probability mass function on the alphabet {0, ..., m-1}, m >= 2.

    Entries are nonnegative and sum to 1 within 1e-12.  The backing array
    is frozen, so instances can be shared freely.
    """

    __slots__ = ("_probs",)

    def __init__(self, probs: Iterable[float]):
        arr = np.asarray(list(probs) if not isinstance(probs, np.ndarray) else probs,
                         dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("probs must be a 1-D vector")
        if arr.size < 2:
            raise ValueError(f"alphabet size must be >= 2, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("probs must be finite")
        if np.any(arr < 0):
            raise ValueError("probs must be nonnegative")
        total = float(arr.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probs must sum to 1 within {NORMALIZATION_TOL}, got {total!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        self._probs = arr

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def alphabet_size(self) -> int:
        return self._probs.size

    def support(self) -> np.ndarray:
        """Indices of symbols with strictly positive probability."""
        return np.flatnonzero(self._probs > 0)

    def __len__(self) -> int:
        return self._probs.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinitePmf):
            return NotImplemented
        return self._probs.shape == other._probs.shape and bool(
            np.all(self._probs == other._probs))

    def __hash__(self) -> int:
        return hash(self._probs.tobytes())

    def __repr__(self) -> str:
        return f"FinitePmf({self._probs.tolist()})"


class DistributionFamily:
    """An ordered family of pairwise-distinct pmfs on a shared alphabet.

    Distinctness means a sup-norm gap above 1e-9 for every pair, which is
    equivalent (up to tolerance) to a strictly positive Bhattacharyya
    distance.
    """

    __slots__ = ("_members",)

    def __init__(self, members: Iterable[FinitePmf]):
        mem = tuple(members)
        if len(mem) < 2:
            raise ValueError(f"family must have at least 2 members, got {len(mem)}")
        for p in mem:
            if not isinstance(p, FinitePmf):
                raise ValueError("family members must be FinitePmf instances")
        m = mem[0].alphabet_size
        for p in mem[1:]:
            if p.alphabet_size != m:
                raise ValueError("family members must share one alphabet size")
        for i in range(len(mem)):
            for j in range(i + 1, len(mem)):
                gap = float(np.max(np.abs(mem[i].probs - mem[j].probs)))
                if gap <= DISTINCT_TOL:
                    raise ValueError(
                        f"members {i} and {j} are not distinct "
                        f"(sup-norm gap {gap!r} <= {DISTINCT_TOL})")
        self._members = mem

    @property
    def members(self) -> tuple[FinitePmf, ...]:
        return self._members

    @property
    def alphabet_size(self) -> int:
        return self._members[0].alphabet_size

    def prob_matrix(self) -> np.ndarray:
        """Member pmfs stacked into a (size, alphabet_size) array."""
        return np.stack([p.probs for p in self._members])

    def __len__(self) -> int:
        return len(self._members)

    def __getitem__(self, i: int) -> FinitePmf:
        return self._members[i]

    def __iter__(self):
        return iter(self._members)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DistributionFamily):
            return NotImplemented
        return self._members == other._members

    def __repr__(self) -> str:
        return f"DistributionFamily(size={len(self._members)}, m={self.alphabet_size})"


class ObservationBatch:
    """One length-n symbol sequence per family member, stacked row-wise."""

    __slots__ = ("_sequences", "_alphabet_size")

    def __init__(self, sequences, alphabet_size: int):
        arr = np.asarray(sequences, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("sequences must be a 2-D array (rows x symbols)")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("batch must have at least one row and one symbol")
        if alphabet_size < 2:
            raise ValueError("alphabet size must be >= 2")
        if arr.size and (arr.min() < 0 or arr.max() >= alphabet_size):
            raise ValueError(
                f"symbol indices must lie in [0, {alphabet_size}), "
                f"got range [{arr.min()}, {arr.max()}]")
        arr = arr.copy()
        arr.flags.writeable = False
        self._sequences = arr
        self._alphabet_size = int(alphabet_size)

    @property
    def sequences(self) -> np.ndarray:
        return self._sequences

    @property
    def alphabet_size(self) -> int:
        return self._alphabet_size

    @property
    def num_rows(self) -> int:
        return self._sequences.shape[0]

    @property
    def blocklength(self) -> int:
        return self._sequences.shape[1]

    def symbol_counts(self) -> np.ndarray:
        """Per-row histogram of symbols, shape (rows, alphabet_size)."""
        return np.stack([np.bincount(row, minlength=self._alphabet_size)
                         for row in self._sequences])


def bhattacharyya(p: FinitePmf, q: FinitePmf) -> float:
    """Bhattacharyya distance -log sum_x sqrt(p(x) q(x)).

    Symmetric and nonnegative; +inf exactly when the supports are
    disjoint.  The coefficient is clipped at 1 so that near-identical
    pmfs cannot produce a negative distance through rounding.
    """
    if p.alphabet_size != q.alphabet_size:
        raise ValueError(
            f"alphabet sizes differ: {p.alphabet_size} vs {q.alphabet_size}")
    coeff = float(np.sqrt(p.probs * q.probs).sum())
    if coeff <= 0.0:
        return math.inf
    return max(0.0, -math.log(min(coeff, 1.0)))


def distance_matrix(family: DistributionFamily) -> np.ndarray:
    """All pairwise Bhattacharyya distances, shape (A, A); +inf off-support."""
    roots = np.sqrt(family.prob_matrix())
    coeff = roots @ roots.T
    np.clip(coeff, 0.0, 1.0, out=coeff)
    with np.errstate(divide="ignore"):
        dist = -np.log(coeff)
    np.fill_diagonal(dist, 0.0)
    return dist


def tilted_midpoint(p: FinitePmf, q: FinitePmf) -> FinitePmf:
    """Normalized geometric mean of two pmfs.

    Its support is the intersection of the inputs' supports, and it
    satisfies D(mid||p) + D(mid||q) = 2 B(p, q).
    """
    if p.alphabet_size != q.alphabet_size:
        raise ValueError(
            f"alphabet sizes differ: {p.alphabet_size} vs {q.alphabet_size}")
    raw = np.sqrt(p.probs * q.probs)
    total = float(raw.sum())
    if total <= 0.0:
        raise ValueError("supports are disjoint; the geometric mean is degenerate")
    return FinitePmf(raw / total)


def kl_divergence(p: FinitePmf, q: FinitePmf) -> float:
    """Kullback-Leibler divergence with the 0 log 0 = 0 convention.

    +inf when p puts mass where q does not.
    """
    if p.alphabet_size != q.alphabet_size:
        raise ValueError(
            f"alphabet sizes differ: {p.alphabet_size} vs {q.alphabet_size}")
    total = 0.0
    for a, b in zip(p.probs, q.probs):
        if a > 0.0:
            if b <= 0.0:
                return math.inf
            total += a * math.log(a / b)
    return total


def sample_sequence(p: FinitePmf, n: int, seed: int) -> np.ndarray:
    """Draw n i.i.d. symbols from p, deterministically for a given seed.

    Inverse-CDF over the cumulative vector; the uniforms come from a
    counter-based stream so independent per-sequence seeds can be derived
    from a master seed.
    """
    if n < 1:
        raise ValueError(f"sequence length must be >= 1, got {n}")
    rng = philox_stream(seed)
    cum = np.cumsum(p.probs)
    u = rng.random(n)
    idx = np.searchsorted(cum, u, side="right")
    # rounding in cum can leave cum[-1] slightly below 1
    np.minimum(idx, p.alphabet_size - 1, out=idx)
    return idx


def _binary_grid(size: int, theta_min: float, theta_max: float) -> list[FinitePmf]:
    if size < 2:
        raise ValueError("binary-grid needs size >= 2")
    if not (0.0 <= theta_min < theta_max <= 1.0):
        raise ValueError(
            f"binary-grid needs 0 <= theta_min < theta_max <= 1, "
            f"got [{theta_min}, {theta_max}]")
    thetas = np.linspace(theta_min, theta_max, size)
    return [FinitePmf([t, 1.0 - t]) for t in thetas]


def _random_simplex(size: int, alphabet_size: int, seed: int) -> list[FinitePmf]:
    if size < 2:
        raise ValueError("random-simplex needs size >= 2")
    if alphabet_size < 2:
        raise ValueError("random-simplex needs alphabet size >= 2")
    rng = philox_stream(seed)
    # exponential weights normalize to a uniform draw from the simplex
    w = rng.exponential(1.0, size=(size, alphabet_size))
    w /= w.sum(axis=1, keepdims=True)
    return [FinitePmf(row) for row in w]


def make_family(spec) -> DistributionFamily:
    """Build a DistributionFamily from a spec.

    Accepted forms:
      - a sequence of pmf row vectors (explicit members), or
      - a mapping with a "kind" key:
          kind="explicit":       pmfs=<list of rows>
          kind="binary-grid":    size, theta_min, theta_max
          kind="random-simplex": size, alphabet, seed

    The result is deterministic given the spec (random-simplex uses its
    own seed field).
    """
    if isinstance(spec, DistributionFamily):
        return spec
    if isinstance(spec, dict):
        unknown = set(spec) - {"kind", "pmfs", "size", "theta_min", "theta_max",
                               "alphabet", "seed"}
        if unknown:
            raise ValueError(f"unknown family spec keys: {sorted(unknown)}")
        kind = spec.get("kind")
        if kind == "explicit":
            if "pmfs" not in spec:
                raise ValueError("explicit family spec needs a 'pmfs' list")
            return DistributionFamily([FinitePmf(row) for row in spec["pmfs"]])
        if kind == "binary-grid":
            try:
                size = spec["size"]
                lo, hi = spec["theta_min"], spec["theta_max"]
            except KeyError as exc:
                raise ValueError(f"binary-grid spec missing key: {exc}") from None
            return DistributionFamily(_binary_grid(int(size), float(lo), float(hi)))
        if kind == "random-simplex":
            try:
                size, m, seed = spec["size"], spec["alphabet"], spec["seed"]
            except KeyError as exc:
                raise ValueError(f"random-simplex spec missing key: {exc}") from None
            return DistributionFamily(_random_simplex(int(size), int(m), int(seed)))
        raise ValueError(f"unknown family spec kind: {kind!r}")
    if isinstance(spec, Sequence):
        return DistributionFamily([
            row if isinstance(row, FinitePmf) else FinitePmf(row) for row in spec])
    raise ValueError(f"cannot build a family from {type(spec).__name__}")
