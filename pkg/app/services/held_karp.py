import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import SolverTimeoutException
from app.models.cluster import ClusterTree
from app.models.graph import MetricGraph

logger = logging.getLogger(__name__)

# Upper bound on the scratch array built per vectorized transition.
_BATCH_ELEMENTS = 4_000_000


class DPWidthExceeded(Exception):
    """Raised when a level of the clustering has more blocks than the DP may hold."""

    def __init__(self, blocks: int):
        super().__init__(f"{blocks} blocks at one level")
        self.blocks = blocks


@dataclass
class Block:
    """
    A unit the path DP treats atomically: a single vertex, or a whole child
    cluster that must be traversed in one piece. `table[a, b]` is the cheapest
    path through the block entering at port a and leaving at port b;
    `expand(a, b)` recovers that path as vertices.
    """

    ports: Tuple[int, ...]
    table: np.ndarray
    expand: Callable[[int, int], List[int]]

    @classmethod
    def singleton(cls, vertex: int) -> "Block":
        return cls(ports=(vertex,), table=np.zeros((1, 1)), expand=lambda a, b: [vertex])


def _check_deadline(deadline: Optional[float]) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise SolverTimeoutException("dynamic program ran out of budget")


class BlockPathDP:
    """
    Held-Karp over blocks instead of vertices.

    States are (set of blocks visited besides the start block, exit port of
    the last block). Adding block j from exit port p costs
    min_a w(p, a) + table_j[a, b]; those entry-minimised costs are
    precomputed per block. Layers are filled by popcount, each transition
    vectorized over all masks of the layer that lack the block.
    """

    def __init__(self, weights: np.ndarray, blocks: Sequence[Block], deadline: Optional[float] = None):
        self.blocks = list(blocks)
        self.deadline = deadline
        self.ports = np.array([v for block in self.blocks for v in block.ports], dtype=np.int64)
        self.offsets = np.cumsum([0] + [len(block.ports) for block in self.blocks])
        self.owner = np.repeat(np.arange(len(self.blocks)), [len(b.ports) for b in self.blocks])
        self.w = weights[np.ix_(self.ports, self.ports)]
        self.entry_costs = [
            (self.w[:, self._columns(j)][:, :, None] + block.table[None, :, :]).min(axis=1)
            for j, block in enumerate(self.blocks)
        ]

    @property
    def size(self) -> int:
        return len(self.ports)

    def _columns(self, j: int) -> np.ndarray:
        return np.arange(self.offsets[j], self.offsets[j + 1])

    def _bits(self, start_block: int) -> List[int]:
        return [j for j in range(len(self.blocks)) if j != start_block]

    def run(self, start_block: int, start_port: int) -> np.ndarray:
        """Fills the table for paths entering `start_block` at its local port `start_port`."""
        others = self._bits(start_block)
        k = len(others)
        s = self.size
        dp = np.full((1 << k, s), np.inf)
        dp[0, self._columns(start_block)] = self.blocks[start_block].table[start_port]

        masks = np.arange(1 << k, dtype=np.int64)
        popcount = np.bitwise_count(masks)
        for level in range(k):
            _check_deadline(self.deadline)
            layer = masks[popcount == level]
            for bit, j in enumerate(others):
                sources = layer[(layer >> bit) & 1 == 0]
                if sources.size == 0:
                    continue
                columns = self._columns(j)
                costs = self.entry_costs[j]
                step = max(1, _BATCH_ELEMENTS // (s * len(columns)))
                for lo in range(0, sources.size, step):
                    chunk = sources[lo:lo + step]
                    candidate = (dp[chunk][:, :, None] + costs[None, :, :]).min(axis=1)
                    targets = np.ix_(chunk | (1 << bit), columns)
                    dp[targets] = np.minimum(dp[targets], candidate)
        return dp

    def backtrack(self, dp: np.ndarray, start_block: int, start_port: int, end: int) -> List[int]:
        """Rebuilds the vertex sequence that ends at global port index `end` in the full layer."""
        others = self._bits(start_block)
        bit_of = {j: bit for bit, j in enumerate(others)}
        mask = dp.shape[0] - 1
        port = end
        pieces: List[List[int]] = []
        while mask:
            j = int(self.owner[port])
            exit_local = port - int(self.offsets[j])
            previous = mask ^ (1 << bit_of[j])
            before = int(np.argmin(dp[previous] + self.entry_costs[j][:, exit_local]))
            columns = self._columns(j)
            entry_local = int(np.argmin(self.w[before, columns] + self.blocks[j].table[:, exit_local]))
            pieces.append(self.blocks[j].expand(entry_local, exit_local))
            mask, port = previous, before
        exit_local = port - int(self.offsets[start_block])
        pieces.append(self.blocks[start_block].expand(start_port, exit_local))
        return [v for piece in reversed(pieces) for v in piece]

    def path_table(self) -> np.ndarray:
        """Cheapest Hamiltonian path cost over all blocks between every ordered pair of ports."""
        table = np.full((self.size, self.size), np.inf)
        for j, block in enumerate(self.blocks):
            for local in range(len(block.ports)):
                dp = self.run(j, local)
                table[self.offsets[j] + local] = dp[-1]
        return table

    def path(self, entry: int, exit: int) -> List[int]:
        j = int(self.owner[entry])
        local = entry - int(self.offsets[j])
        dp = self.run(j, local)
        return self.backtrack(dp, j, local, exit)

    def best_cycle(self) -> Tuple[List[int], float]:
        """
        Cheapest cycle through every block. The cycle is anchored in the
        block with the fewest ports, trying each of its ports as the entry.
        """
        anchor = min(range(len(self.blocks)), key=lambda j: (len(self.blocks[j].ports), j))
        best_cost = np.inf
        best: Optional[Tuple[int, np.ndarray, int]] = None
        for local in range(len(self.blocks[anchor].ports)):
            dp = self.run(anchor, local)
            closing = dp[-1] + self.w[:, self.offsets[anchor] + local]
            end = int(np.argmin(closing))
            if closing[end] < best_cost:
                best_cost = float(closing[end])
                best = (local, dp, end)
        if best is None:
            return [int(v) for v in self.ports], float("inf")
        local, dp, end = best
        return self.backtrack(dp, anchor, local, end), best_cost


def held_karp(graph: MetricGraph, deadline: Optional[float] = None) -> Tuple[List[int], float]:
    """Exact TSP by the bitmask dynamic program over single vertices."""
    blocks = [Block.singleton(v) for v in range(graph.vertex_count)]
    order, cost = BlockPathDP(graph.weights, blocks, deadline).best_cycle()
    logger.debug(f"held_karp: n={graph.vertex_count}, cost={cost}")
    return order, cost


def hierarchical_cycle(
    graph: MetricGraph,
    tree: ClusterTree,
    deadline: Optional[float] = None,
    max_children: Optional[int] = None,
) -> Tuple[List[int], float]:
    """
    Exact clustered TSP by decomposition along the cluster tree.

    Clusters are processed innermost first: the blocks of a cluster are its
    child clusters (carrying their finished path tables) and its uncovered
    vertices, and a block path DP yields the cluster's own table between all
    ordered pairs of its vertices. The root level is closed into a cycle.
    Raises DPWidthExceeded when some level holds more than `max_children`
    blocks.
    """
    if max_children is None:
        max_children = settings.MAX_DP_CHILDREN

    levels: Dict[Optional[int], Tuple[List[int], List[int]]] = {None: tree.blocks(None)}
    for index in range(len(tree)):
        levels[index] = tree.blocks(index)
    for index, (child_ids, free) in levels.items():
        width = len(child_ids) + len(free)
        if width > max_children:
            raise DPWidthExceeded(width)

    cluster_blocks: Dict[int, Block] = {}

    def level_blocks(index: Optional[int]) -> List[Block]:
        child_ids, free = levels[index]
        return [cluster_blocks[child] for child in child_ids] + [Block.singleton(v) for v in free]

    # Canonical order lists parents before children, so walk it backwards.
    for index in reversed(range(len(tree))):
        dp = BlockPathDP(graph.weights, level_blocks(index), deadline)
        table = dp.path_table()
        cluster_blocks[index] = Block(
            ports=tuple(int(v) for v in dp.ports),
            table=table,
            expand=lambda a, b, dp=dp: dp.path(a, b),
        )
        logger.debug(
            f"hierarchical_cycle: cluster {index} with {len(dp.blocks)} blocks tabled"
        )

    order, cost = BlockPathDP(graph.weights, level_blocks(None), deadline).best_cycle()
    return order, cost
