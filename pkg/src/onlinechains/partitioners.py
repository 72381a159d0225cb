"""On-line chain partitioners over an arbitrary strict order.

Each partitioner is fed items one at a time and irrevocably returns a chain
index.  The order is given as a ``less(a, b)`` callable that must already know
about the newcomer when ``accept`` is called.
"""
from __future__ import annotations

from math import comb
from typing import Callable, Hashable


class ContractViolation(ValueError):
    pass


class OnlinePartitioner:
    declared_bound: Callable[[int], int] | None = None

    def __init__(self, less: Callable[[Hashable, Hashable], bool]):
        self.less = less
        self.chains: list[list] = []
        self.chain_of: dict = {}
        self.alarms: list[str] = []

    def comparable(self, a, b) -> bool:
        return a == b or self.less(a, b) or self.less(b, a)

    def _place(self, item, index: int) -> int:
        if index == len(self.chains):
            self.chains.append([])
        self.chains[index].append(item)
        self.chain_of[item] = index
        return index

    def accept(self, item) -> int:
        raise NotImplementedError

    def __len__(self) -> int:
        return len(self.chains)


class FirstFit(OnlinePartitioner):
    """Lowest chain whose members are all comparable with the newcomer."""

    def accept(self, item) -> int:
        for i, ch in enumerate(self.chains):
            if all(self.comparable(item, o) for o in ch):
                return self._place(item, i)
        return self._place(item, len(self.chains))


def first_fit_bound(k: int, w: int) -> int:
    """Chain bound of First-Fit on (k+k)-free orders of width w."""
    return 8 * k * w


class UpGrowing(OnlinePartitioner):
    """Partitioner for orders whose newcomer is always maximal.

    A chain is *live* while its top is a maximal element.  The newcomer goes
    to the lowest live chain whose top it covers; failing that to the lowest
    chain whose top lies below it; failing that to a new chain.  Because every
    member of a chain sits below its top, ``top < x`` is all that validity needs.
    """

    @staticmethod
    def declared_bound(width: int) -> int:
        return comb(width + 1, 2)

    def __init__(self, less):
        super().__init__(less)
        self.items: list = []
        self.maximal: list = []

    def accept(self, item) -> int:
        if any(self.less(item, y) for y in self.items):
            self.alarms.append(f"{item!r} is not maximal at presentation")
        tops = [ch[-1] for ch in self.chains]
        below = [i for i, t in enumerate(tops) if self.less(t, item)]
        maximal = set(self.maximal)
        live = [i for i in below if tops[i] in maximal]
        if live:
            idx = live[0]
        elif below:
            idx = below[0]
        else:
            idx = len(self.chains)
        self.maximal = [m for m in self.maximal if not self.less(m, item)] + [item]
        self.items.append(item)
        return self._place(item, idx)


class DownGrowing(OnlinePartitioner):
    """Up-growing partitioner run on the reversed order."""

    declared_bound = staticmethod(UpGrowing.declared_bound)

    def __init__(self, less):
        super().__init__(less)
        self.inner = UpGrowing(lambda a, b: less(b, a))
        self.chains = self.inner.chains
        self.chain_of = self.inner.chain_of
        self.alarms = self.inner.alarms

    def accept(self, item) -> int:
        return self.inner.accept(item)


def general_partitioner(less) -> OnlinePartitioner:
    """Default general on-line partitioner (First-Fit)."""
    return FirstFit(less)

