"""Block-diagonal direct sums of nested sections and exhaustive partition search.

Index j >= 1 enumerates the pairs (N, m), 1 <= m <= N, row by row:
(1,1), (2,1), (2,2), (3,1), ...  Index j stands for the kernel x_m placed in
block N.  Blocks are mutually orthogonal, so the restriction of the direct
sum to a set of indices splits into one restricted section per block.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh

from .errors import BudgetError, DomainError
from .modelop import KernelSection, build_section, section_spectrum

MAX_PARTITIONS = 10**8


def enumerate_index(j: int) -> tuple[int, int]:
    """j -> (N, m) with N = floor(sqrt(2j) + 1/2), m = j - N(N-1)/2."""
    if j < 1:
        raise DomainError(f"index must be >= 1, got {j}")
    n = math.isqrt(2 * j)
    # floor(sqrt(2j) + 1/2) in exact integer arithmetic: compare (n + 1/2)^2 with 2j
    if (2 * n + 1) ** 2 <= 8 * j:
        n += 1
    return n, j - n * (n - 1) // 2


def index_of(n: int, m: int) -> int:
    if not 1 <= m <= n:
        raise DomainError(f"need 1 <= m <= N, got N={n}, m={m}")
    return n * (n - 1) // 2 + m


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Direct sum of the leading sections T_1, ..., T_{N_max} of one section."""

    base: KernelSection

    @classmethod
    def from_data(cls, zeros_halfplane: Sequence, targets: Sequence[complex]) -> "BlockOperator":
        return cls(build_section(zeros_halfplane, targets))

    @property
    def n_max(self) -> int:
        return self.base.n

    @property
    def total_dim(self) -> int:
        return self.n_max * (self.n_max + 1) // 2

    def block(self, n: int) -> KernelSection:
        if not 1 <= n <= self.n_max:
            raise DomainError(f"block {n} outside 1..{self.n_max}")
        return self.base.sub(range(n))

    @property
    def blocks(self) -> list:
        return [self.block(n) for n in range(1, self.n_max + 1)]

    @property
    def targets(self) -> np.ndarray:
        return np.asarray(self.base.targets)

    def sub_sigma_min(self, n: int, ms: frozenset) -> float:
        """sigma_min of block n restricted to kernels m in ``ms`` (1-based)."""
        return _sub_sigma(self, n, ms)


def _sub_sigma(a: BlockOperator, n: int, ms: frozenset) -> float:
    idx = sorted(m - 1 for m in ms)
    if idx[-1] >= n:
        raise DomainError(f"kernel index {idx[-1] + 1} outside block {n}")
    return section_spectrum(a.base.sub(idx)).sigma_min


@dataclass(frozen=True)
class Partition:
    """assignment[j-1] is the part (0-based) of index j."""

    assignment: tuple

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(s) for s in self.assignment))
        if any(s < 0 for s in self.assignment):
            raise DomainError("parts are numbered from 0")

    @property
    def n_indices(self) -> int:
        return len(self.assignment)

    def part(self, s: int) -> list[int]:
        return [j + 1 for j, t in enumerate(self.assignment) if t == s]


def _part_blocks(p: Partition, s: int) -> dict:
    out: dict = {}
    for j in p.part(s):
        n, m = enumerate_index(j)
        out.setdefault(n, set()).add(m)
    return {n: frozenset(ms) for n, ms in out.items()}


class _Memo:
    def __init__(self, a: BlockOperator):
        self.a = a
        self.cache: dict = {}

    def __call__(self, n: int, ms: frozenset) -> float:
        key = (n, ms)
        if key not in self.cache:
            self.cache[key] = self.a.sub_sigma_min(n, ms)
        return self.cache[key]


def restricted_sigma_min(a: BlockOperator, p: Partition, s: int, _memo: Optional[_Memo] = None) -> float:
    """inf ||A x|| over unit x in the span of part s; +inf when the part is empty."""
    memo = _memo or _Memo(a)
    blocks = _part_blocks(p, s)
    if not blocks:
        return math.inf
    if max(blocks) > a.n_max:
        raise DomainError(f"partition reaches block {max(blocks)} beyond the materialized {a.n_max}")
    return min(memo(n, ms) for n, ms in sorted(blocks.items()))


def dense_restricted_sigma_min(a: BlockOperator, p: Partition, s: int) -> float:
    """Same quantity from the assembled block-diagonal pencil (test oracle)."""
    idx = p.part(s)
    if not idx:
        return math.inf
    pairs = [enumerate_index(j) for j in idx]
    dim = len(pairs)
    g = np.zeros((dim, dim), dtype=complex)
    t = np.empty(dim, dtype=complex)
    full = np.asarray(a.base.gram)
    for u, (nu, mu) in enumerate(pairs):
        t[u] = a.base.targets[mu - 1]
        for v, (nv, mv) in enumerate(pairs):
            if nu == nv:
                g[u, v] = full[mu - 1, mv - 1]
    # symmetric square root of G instead of the Cholesky route used block-wise:
    # sigma(T) = sigma(G^{1/2} D G^{-1/2}), with no squaring of small values
    lam, u = eigh(g)
    root = (u * np.sqrt(lam)) @ u.conj().T
    inv_root = (u / np.sqrt(lam)) @ u.conj().T
    return float(np.linalg.svd(root @ np.diag(t) @ inv_root, compute_uv=False)[-1])


def partition_value(a: BlockOperator, p: Partition, r: int, _memo: Optional[_Memo] = None) -> float:
    memo = _memo or _Memo(a)
    return min(restricted_sigma_min(a, p, s, memo) for s in range(r))


@dataclass(frozen=True)
class PartitionResult:
    partition: Partition
    value: float
    partitions_searched: int


def best_partition(a: BlockOperator, r: int, j_max: int) -> PartitionResult:
    """Exhaustive max over r-part partitions of {1..j_max} of the worst part's sigma_min.

    Index 1 is fixed in part 0; among maximizers the lexicographically
    smallest assignment wins.
    """
    if r < 1 or j_max < 1:
        raise DomainError("need r >= 1 and J_max >= 1")
    if float(r) ** j_max > MAX_PARTITIONS:
        raise BudgetError(
            f"r^J = {r}^{j_max} exceeds the exhaustive budget {MAX_PARTITIONS:.0e}; use a sampling search instead"
        )
    need_n = enumerate_index(j_max)[0]
    if need_n > a.n_max:
        raise DomainError(f"J_max={j_max} needs block {need_n}, only {a.n_max} materialized")
    memo = _Memo(a)
    pairs = [enumerate_index(j) for j in range(1, j_max + 1)]
    best_val, best_asg, count = -math.inf, None, 0
    for rest in itertools.product(range(r), repeat=j_max - 1):
        asg = (0,) + rest
        count += 1
        parts: list = [dict() for _ in range(r)]
        for (n, m), s in zip(pairs, asg):
            parts[s].setdefault(n, set()).add(m)
        val = math.inf
        for blocks in parts:
            for n, ms in blocks.items():
                val = min(val, memo(n, frozenset(ms)))
                if val <= best_val:
                    break
            if val <= best_val:
                break
        # strict improvement keeps the first (lexicographically smallest) maximizer
        if val > best_val:
            best_val, best_asg = val, asg
    return PartitionResult(Partition(best_asg), best_val, count)


@dataclass(frozen=True)
class DecayRow:
    r: int
    j: int
    best_value: float
    partitions_searched: int
    partition: Partition


def decay_table(a: BlockOperator, r: int, j_list: Sequence[int]) -> list[DecayRow]:
    out = []
    for j in j_list:
        res = best_partition(a, r, j)
        out.append(DecayRow(r, j, res.value, res.partitions_searched, res.partition))
    return out
