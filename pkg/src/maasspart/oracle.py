"""Independent exact computation of p(n) for cross-validation."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["PartitionTable", "partition_pentagonal", "partitions_brute", "BRUTE_LIMIT"]

BRUTE_LIMIT = 60


@dataclass(frozen=True)
class PartitionTable:
    values: tuple  # p(0) ... p(n_max)

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)


def partition_pentagonal(n_max):
    """p(0..n_max) by Euler's pentagonal-number recurrence."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    p = [0] * (n_max + 1)
    p[0] = 1
    for n in range(1, n_max + 1):
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > n and g2 > n:
                break
            sign = 1 if k % 2 else -1
            if g1 <= n:
                total += sign * p[n - g1]
            if g2 <= n:
                total += sign * p[n - g2]
            k += 1
        p[n] = total
    return PartitionTable(tuple(p))


def partitions_brute(n):
    """Count partitions by directly walking every nonincreasing sequence.

    Deliberately memo-free so it stays independent of the recurrence; guarded
    because the walk visits every partition.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > BRUTE_LIMIT:
        raise ValueError(f"n = {n} exceeds the brute-force guard {BRUTE_LIMIT}")

    def count(rest, largest):
        if rest == 0:
            return 1
        return sum(count(rest - part, part) for part in range(min(rest, largest), 0, -1))

    return count(n, n)
