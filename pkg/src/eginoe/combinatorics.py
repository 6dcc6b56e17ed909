"""Compositions, integer partitions, and the zonal polynomial Z_{(1^k)}."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Sequence

from .specfun import SignedLog

__all__ = [
    "Composition",
    "Partition",
    "CancellationWarning",
    "compositions",
    "partitions",
    "partition_count",
    "zonal_1k",
]


class CancellationWarning(UserWarning):
    """An alternating sum lost more digits than the certified budget."""


@dataclass(frozen=True)
class Composition:
    parts: tuple


@dataclass(frozen=True)
class Partition:
    """Multiplicity encoding: multiplicities[j-1] = number of parts equal to j."""

    multiplicities: tuple

    @property
    def size(self) -> int:
        return sum((j + 1) * m for j, m in enumerate(self.multiplicities))


def compositions(q: int, k: int) -> Iterator[Composition]:
    """Ordered k-tuples of positive integers summing to q, lexicographic."""
    if q < 1 or k < 1:
        raise ValueError("compositions requires q >= 1, k >= 1")
    if k > q:
        return
    yield from (Composition(t) for t in _comp_rec(q, k))


def _comp_rec(q: int, k: int):
    if k == 1:
        yield (q,)
        return
    for first in range(1, q - k + 2):
        for rest in _comp_rec(q - first, k - 1):
            yield (first,) + rest


def partitions(k: int) -> Iterator[Partition]:
    """All partitions of k in multiplicity form; count = p(k)."""
    if k < 0 or k > 40:
        raise ValueError("partitions supports 0 <= k <= 40")

    def rec(rem: int, maxpart: int):
        if rem == 0:
            yield ()
            return
        for j in range(min(rem, maxpart), 0, -1):
            for cnt in range(rem // j, 0, -1):
                for rest in rec(rem - j * cnt, j - 1):
                    yield ((j, cnt),) + rest

    for assign in rec(k, k):
        mult = [0] * k
        for j, cnt in assign:
            mult[j - 1] = cnt
        yield Partition(tuple(mult))


def partition_count(k: int) -> int:
    return sum(1 for _ in partitions(k))


def zonal_1k(xi: Sequence, warn_digits: float = 10.0):
    """Z_{(1^k)}(xi_1, ..., xi_k) = (-1)^k k! sum_{|sigma|=k} prod_j (1/sigma_j!) (-xi_j/j)^{sigma_j}.

    Works on SignedLog, float, or mpmath values (duck typed).  Warns when the
    alternating partition sum cancels away more than ``warn_digits`` digits.
    """
    k = len(xi)
    if k < 1:
        raise ValueError("zonal_1k needs at least one trace")
    is_sl = isinstance(xi[0], SignedLog)
    terms = []
    for part in partitions(k):
        if is_sl:
            term = SignedLog.from_real(1.0)
        else:
            term = xi[0] ** 0  # one, in the caller's arithmetic
        for j, mult in enumerate(part.multiplicities, start=1):
            if mult == 0:
                continue
            base = -(xi[j - 1] / j) if is_sl else (-xi[j - 1] / j)
            term = term * base**mult / math.factorial(mult)
        terms.append(term)
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    result = total * ((-1) ** k * math.factorial(k))

    if is_sl:
        max_log = max((t.log_abs for t in terms if not t.is_zero()), default=float("-inf"))
        res_log = result.log_abs if not result.is_zero() else float("-inf")
    else:
        amax = max(abs(t) for t in terms)
        max_log = math.log(amax) if amax else float("-inf")
        res_log = math.log(abs(result)) if result else float("-inf")
    if max_log > res_log + warn_digits * math.log(10.0):
        warnings.warn(
            f"zonal_1k lost ~{(max_log - res_log) / math.log(10.0):.1f} digits to cancellation",
            CancellationWarning,
        )
    return result
