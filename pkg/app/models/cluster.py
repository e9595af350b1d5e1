from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from app.models.graph import VertexSet


@dataclass(frozen=True)
class ClusterMetrics:
    """Separation metrics of a vertex set: cheapest leaving edge, costliest inner edge, ratio."""

    alpha: float
    beta: float
    gamma: float


@dataclass(frozen=True)
class Cluster:
    vertices: VertexSet
    metrics: ClusterMetrics
    parent: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.vertices)


def canonical_key(members: VertexSet) -> Tuple[int, VertexSet]:
    """Canonical cluster order: larger sets first, then lexicographic."""
    return (-len(members), members)


@dataclass
class ClusterTree:
    """
    Laminar family of non-trivial proper clusters.

    Singletons and the full vertex set are never stored. Clusters are kept in
    canonical order, so a parent always precedes its children, and each
    cluster links to its smallest stored strict superset.
    """

    vertex_count: int
    gamma_threshold: float
    clusters: List[Cluster] = field(default_factory=list)

    @classmethod
    def build(
        cls,
        vertex_count: int,
        gamma_threshold: float,
        entries: Iterable[Tuple[VertexSet, ClusterMetrics]],
    ) -> "ClusterTree":
        ordered = sorted(entries, key=lambda entry: canonical_key(entry[0]))
        member_sets = [frozenset(members) for members, _ in ordered]
        clusters: List[Cluster] = []
        for i, (members, metrics) in enumerate(ordered):
            parent = None
            # Candidates precede i in canonical order; the last one found is the smallest.
            for j in range(i):
                if member_sets[i] < member_sets[j]:
                    if parent is None or len(member_sets[j]) <= len(member_sets[parent]):
                        parent = j
            clusters.append(Cluster(vertices=members, metrics=metrics, parent=parent))
        return cls(
            vertex_count=vertex_count,
            gamma_threshold=gamma_threshold,
            clusters=clusters,
        )

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    def vertex_sets(self) -> List[VertexSet]:
        return [cluster.vertices for cluster in self.clusters]

    @property
    def is_nested(self) -> bool:
        return any(cluster.parent is not None for cluster in self.clusters)

    def children(self, index: Optional[int]) -> List[int]:
        """Direct child clusters of cluster `index`, or the top-level clusters for None."""
        return [i for i, cluster in enumerate(self.clusters) if cluster.parent == index]

    def blocks(self, index: Optional[int]) -> Tuple[List[int], List[int]]:
        """
        Splits cluster `index` (or the whole vertex set for None) into its child
        clusters and the vertices covered by no child.
        """
        child_ids = self.children(index)
        if index is None:
            scope: Iterable[int] = range(self.vertex_count)
        else:
            scope = self.clusters[index].vertices
        covered = set()
        for child in child_ids:
            covered.update(self.clusters[child].vertices)
        free = [v for v in scope if v not in covered]
        return child_ids, free

    def innermost(self) -> Dict[int, int]:
        """Maps each clustered vertex to the index of the smallest cluster holding it."""
        owner: Dict[int, int] = {}
        for i, cluster in enumerate(self.clusters):
            for v in cluster.vertices:
                # Later clusters are never larger, so overwriting keeps the smallest.
                owner[v] = i
        return owner
