"""Ordered multiset with logarithmic rank queries and an optional FIFO window.

Values live in a list of sorted blocks (each at most ``2 * load`` long). A
Fenwick tree over the block lengths turns "how many values sit in blocks
before this one" into an O(log B) prefix sum, so insert, remove and the three
count queries cost O(log n) comparisons plus one bounded ``list.insert``.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right, insort
from collections import deque
from typing import Iterable, Iterator


class RankStore:
    """Multiset of finite floats answering ``count_lt``/``count_le``/``count_eq``.

    Args:
        window: if given, keep only the ``window`` most recent insertions;
            inserting into a full store first evicts the oldest value.
        load: target block length (tuning knob, not part of the contract).
    """

    def __init__(self, values: Iterable[float] = (), window: int | None = None, load: int = 512):
        if window is not None and window < 1:
            raise ValueError(f"window must be a positive integer, got {window}")
        if load < 4:
            raise ValueError("load must be >= 4")
        self.window = window
        self._load = load
        self._blocks: list[list[float]] = []
        self._maxes: list[float] = []
        self._tree: list[int] = [0]
        self._size = 0
        self._arrivals: deque[float] | None = deque() if window is not None else None
        for v in values:
            self.insert(v)

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[float]:
        for block in self._blocks:
            yield from block

    def __repr__(self) -> str:
        return f"RankStore(size={self._size}, window={self.window})"

    @property
    def size(self) -> int:
        return self._size

    # Fenwick tree over block lengths (1-based, self._tree[0] unused)

    def _rebuild_tree(self) -> None:
        tree = [0] * (len(self._blocks) + 1)
        for i, block in enumerate(self._blocks, 1):
            tree[i] += len(block)
            j = i + (i & -i)
            if j < len(tree):
                tree[j] += tree[i]
        self._tree = tree

    def _tree_add(self, pos: int, delta: int) -> None:
        tree = self._tree
        i = pos + 1
        n = len(tree)
        while i < n:
            tree[i] += delta
            i += i & -i

    def _before(self, pos: int) -> int:
        """Number of values in blocks [0, pos)."""
        tree = self._tree
        total = 0
        i = pos
        while i > 0:
            total += tree[i]
            i -= i & -i
        return total

    @staticmethod
    def _check(x: float) -> float:
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"RankStore accepts finite values only, got {x!r}")
        return x

    def insert(self, x: float) -> None:
        """Add ``x``; in windowed mode a full store evicts its oldest value first."""
        x = self._check(x)
        if self._arrivals is not None:
            if self._size == self.window:
                self._discard(self._arrivals.popleft())
            self._arrivals.append(x)
        self._add(x)

    def _add(self, x: float) -> None:
        maxes = self._maxes
        if not maxes:
            self._blocks.append([x])
            maxes.append(x)
            self._size = 1
            self._rebuild_tree()
            return
        pos = bisect_left(maxes, x)
        if pos == len(maxes):
            pos -= 1
            self._blocks[pos].append(x)
            maxes[pos] = x
        else:
            insort(self._blocks[pos], x)
        self._size += 1
        block = self._blocks[pos]
        if len(block) > 2 * self._load:
            half = len(block) >> 1
            self._blocks[pos:pos + 1] = [block[:half], block[half:]]
            maxes[pos:pos + 1] = [block[half - 1], block[-1]]
            self._rebuild_tree()
        else:
            self._tree_add(pos, 1)

    def remove(self, x: float) -> None:
        """Remove one occurrence of ``x`` (KeyError if absent).

        Not available in windowed mode, where eviction order is owned by the store.
        """
        if self._arrivals is not None:
            raise RuntimeError("remove() is not allowed on a windowed store")
        self._discard(self._check(x))

    def _discard(self, x: float) -> None:
        pos = bisect_left(self._maxes, x)
        if pos == len(self._maxes):
            raise KeyError(x)
        block = self._blocks[pos]
        j = bisect_left(block, x)
        if j == len(block) or block[j] != x:
            raise KeyError(x)
        del block[j]
        self._size -= 1
        if not block:
            del self._blocks[pos]
            del self._maxes[pos]
            self._rebuild_tree()
            return
        self._maxes[pos] = block[-1]
        if len(block) < self._load // 4 and len(self._blocks) > 1:
            # merge small blocks so the block count stays O(n / load)
            other = pos - 1 if pos > 0 else pos + 1
            lo, hi = min(pos, other), max(pos, other)
            merged = self._blocks[lo] + self._blocks[hi]
            self._blocks[lo:hi + 1] = [merged]
            self._maxes[lo:hi + 1] = [merged[-1]]
            self._rebuild_tree()
        else:
            self._tree_add(pos, -1)

    def count_lt(self, x: float) -> int:
        """Number of stored values strictly less than ``x``."""
        x = self._check(x)
        pos = bisect_left(self._maxes, x)
        if pos == len(self._maxes):
            return self._size
        return self._before(pos) + bisect_left(self._blocks[pos], x)

    def count_le(self, x: float) -> int:
        """Number of stored values less than or equal to ``x``."""
        x = self._check(x)
        pos = bisect_right(self._maxes, x)
        if pos == len(self._maxes):
            return self._size
        return self._before(pos) + bisect_right(self._blocks[pos], x)

    def count_eq(self, x: float) -> int:
        return self.count_le(x) - self.count_lt(x)

    def counts(self, x: float) -> tuple[int, int]:
        """``(count_lt(x), count_eq(x))`` in one pass; the scorers' hot path."""
        x = self._check(x)
        maxes = self._maxes
        lo = bisect_left(maxes, x)
        if lo == len(maxes):
            return self._size, 0
        block = self._blocks[lo]
        lt = self._before(lo) + bisect_left(block, x)
        if block[-1] > x:
            return lt, bisect_right(block, x) - bisect_left(block, x)
        return lt, self.count_le(x) - lt
