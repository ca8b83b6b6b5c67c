"""Set partitions of ``{0, ..., n-1}`` via restricted-growth strings."""
from __future__ import annotations

from typing import Iterator


def restricted_growth_strings(n: int) -> Iterator[list[int]]:
    """Yield every restricted-growth string of length ``n`` in lexicographic order.

    ``a[0] = 0`` and ``a[i] <= 1 + max(a[:i])``; element ``i`` belongs to
    block ``a[i]``.  The same list object is reused between yields.
    """
    if n == 0:
        yield []
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])
    while True:
        yield a
        i = n - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = max(b[i], a[i] + 1)


def set_partitions(n: int) -> Iterator[list[list[int]]]:
    for a in restricted_growth_strings(n):
        blocks: list[list[int]] = [[] for _ in range(max(a, default=-1) + 1)]
        for i, k in enumerate(a):
            blocks[k].append(i)
        yield blocks


def bell(n: int) -> int:
    """Bell number via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]
