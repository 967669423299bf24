"""Top-k similarity graphs, Louvain communities and the explorer JSON export."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .metadata import MovieMetadata
from .similarity import SimilarityMatrix


@dataclass
class GraphNode:
    movie_id: str
    title: str
    score: float
    genres: list[str] = field(default_factory=list)
    directors: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class GraphEdge:
    a: str
    b: str
    weight: float


@dataclass
class MovieGraph:
    model: str
    nodes: list[GraphNode]
    edges: list[GraphEdge]

    @property
    def node_ids(self) -> list[str]:
        return [n.movie_id for n in self.nodes]


@dataclass
class CommunityAssignment:
    membership: dict[str, int]
    modularity: float
    phase_modularities: list[float] = field(default_factory=list)


def build_graph(
    sim: SimilarityMatrix,
    metadata: list[MovieMetadata] | None = None,
    k: int = 3,
    min_weight: float = 0.0,
) -> MovieGraph:
    """Union of every node's top-k neighbor edges, deduplicated undirected.

    Neighbor ties break by ascending movie_id; edges at or below min_weight
    (and non-positive edges) are dropped.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    by_id = {m.movie_id: m for m in (metadata or [])}
    nodes = []
    for movie_id in sim.doc_ids:
        meta = by_id.get(movie_id)
        nodes.append(
            GraphNode(
                movie_id=movie_id,
                title=meta.title if meta else movie_id,
                score=meta.rating if meta else 0.0,
                genres=sorted(meta.normalized("genre")) if meta else [],
                directors=sorted(meta.normalized("director")) if meta else [],
            )
        )

    threshold = max(min_weight, 0.0)
    pairs: dict[tuple[str, str], float] = {}
    n = sim.n
    for q, movie_id in enumerate(sim.doc_ids):
        candidates = [c for c in range(n) if c != q]
        candidates.sort(key=lambda c: (-sim.values[q, c], sim.doc_ids[c]))
        for c in candidates[:k]:
            weight = float(sim.values[q, c])
            if weight <= threshold:
                continue
            key = tuple(sorted((movie_id, sim.doc_ids[c])))
            pairs[key] = weight
    edges = [GraphEdge(a, b, w) for (a, b), w in sorted(pairs.items())]
    return MovieGraph(model=sim.modality, nodes=nodes, edges=edges)


# --------------------------------------------------------------------------
# Louvain community detection
# --------------------------------------------------------------------------

def modularity(
    adjacency: list[dict[int, float]], membership: list[int], resolution: float = 1.0
) -> float:
    """Q = sum_c [in_c / 2m - resolution * (tot_c / 2m)^2].

    adjacency[i][j] holds A_ij; diagonal entries carry twice the collapsed
    internal weight so 2m = sum of all entries.
    """
    two_m = sum(sum(neighbors.values()) for neighbors in adjacency)
    if two_m == 0:
        return 0.0
    communities = set(membership)
    internal = {c: 0.0 for c in communities}
    total = {c: 0.0 for c in communities}
    for i, neighbors in enumerate(adjacency):
        k_i = sum(neighbors.values())
        total[membership[i]] += k_i
        for j, w in neighbors.items():
            if membership[j] == membership[i]:
                internal[membership[i]] += w
    return sum(
        internal[c] / two_m - resolution * (total[c] / two_m) ** 2 for c in communities
    )


def _one_level(
    adjacency: list[dict[int, float]],
    resolution: float,
    rng: np.random.Generator,
) -> tuple[list[int], bool]:
    """Greedy local moves until no single move improves modularity."""
    n = len(adjacency)
    two_m = sum(sum(neighbors.values()) for neighbors in adjacency)
    degree = [sum(neighbors.values()) for neighbors in adjacency]
    community = list(range(n))
    community_total = degree.copy()

    order = np.arange(n)
    rng.shuffle(order)

    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            home = community[i]
            k_i = degree[i]
            community_total[home] -= k_i

            # weight from i to each neighboring community (self-loops stay with i)
            links: dict[int, float] = {}
            for j, w in adjacency[i].items():
                if j != i:
                    links[community[j]] = links.get(community[j], 0.0) + w

            best_community = home
            best_gain = links.get(home, 0.0) - resolution * k_i * community_total[home] / two_m
            for c, w_ic in links.items():
                if c == home:
                    continue
                gain = w_ic - resolution * k_i * community_total[c] / two_m
                if gain > best_gain + 1e-12:
                    best_gain = gain
                    best_community = c

            community[i] = best_community
            community_total[best_community] += k_i
            if best_community != home:
                moved_any = True
                improved = True
    return community, moved_any


def _aggregate(
    adjacency: list[dict[int, float]], community: list[int]
) -> tuple[list[dict[int, float]], list[int]]:
    renumber: dict[int, int] = {}
    for c in community:
        if c not in renumber:
            renumber[c] = len(renumber)
    mapped = [renumber[c] for c in community]
    aggregated: list[dict[int, float]] = [dict() for _ in range(len(renumber))]
    for i, neighbors in enumerate(adjacency):
        ci = mapped[i]
        for j, w in neighbors.items():
            cj = mapped[j]
            aggregated[ci][cj] = aggregated[ci].get(cj, 0.0) + w
    return aggregated, mapped


def louvain(
    graph: MovieGraph, resolution: float = 1.0, seed: int = 42
) -> CommunityAssignment:
    """Two-phase Louvain with a seed-shuffled, deterministic visiting order.

    Modularity never decreases across phases; community ids are renumbered
    so that communities are ordered by their smallest member movie_id.
    """
    if not graph.edges:
        raise ValueError("louvain requires a graph with at least one edge")
    node_ids = graph.node_ids
    index = {movie_id: i for i, movie_id in enumerate(node_ids)}
    n = len(node_ids)
    adjacency: list[dict[int, float]] = [dict() for _ in range(n)]
    for edge in graph.edges:
        a, b = index[edge.a], index[edge.b]
        adjacency[a][b] = adjacency[a].get(b, 0.0) + edge.weight
        adjacency[b][a] = adjacency[b].get(a, 0.0) + edge.weight

    rng = np.random.default_rng(seed)
    membership = list(range(n))
    phase_q: list[float] = []
    current = adjacency

    while True:
        community, moved = _one_level(current, resolution, rng)
        current, mapped = _aggregate(current, community)
        membership = [mapped[membership[i]] for i in range(n)]
        phase_q.append(modularity(adjacency, membership, resolution))
        if not moved:
            break

    # canonical ids: communities ordered by their smallest member movie_id
    smallest: dict[int, str] = {}
    for i, movie_id in enumerate(node_ids):
        c = membership[i]
        if c not in smallest or movie_id < smallest[c]:
            smallest[c] = movie_id
    canonical = {
        c: rank for rank, c in enumerate(sorted(smallest, key=lambda c: smallest[c]))
    }
    final = {movie_id: canonical[membership[i]] for i, movie_id in enumerate(node_ids)}
    return CommunityAssignment(
        membership=final,
        modularity=phase_q[-1],
        phase_modularities=phase_q,
    )


def singleton_assignment(graph: MovieGraph) -> CommunityAssignment:
    """Every node in its own community (for graphs without edges)."""
    membership = {movie_id: i for i, movie_id in enumerate(sorted(graph.node_ids))}
    return CommunityAssignment(membership=membership, modularity=0.0)


# --------------------------------------------------------------------------
# JSON export
# --------------------------------------------------------------------------

def export_json(graph: MovieGraph, assignment: CommunityAssignment) -> str:
    """Serialize with a stable schema and key order; round-trips losslessly."""
    missing = [n for n in graph.node_ids if n not in assignment.membership]
    if missing:
        raise ValueError(f"assignment does not cover nodes: {missing}")
    payload = {
        "model": graph.model,
        "nodes": [
            {
                "id": node.movie_id,
                "title": node.title,
                "score": node.score,
                "genres": node.genres,
                "directors": node.directors,
                "community": assignment.membership[node.movie_id],
            }
            for node in graph.nodes
        ],
        "edges": [
            {"a": e.a, "b": e.b, "weight": e.weight}
            for e in sorted(graph.edges, key=lambda e: (e.a, e.b))
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def parse_graph_json(text: str) -> tuple[MovieGraph, CommunityAssignment]:
    payload = json.loads(text)
    nodes = [
        GraphNode(
            movie_id=n["id"],
            title=n["title"],
            score=n["score"],
            genres=list(n["genres"]),
            directors=list(n["directors"]),
        )
        for n in payload["nodes"]
    ]
    edges = [GraphEdge(e["a"], e["b"], e["weight"]) for e in payload["edges"]]
    membership = {n["id"]: n["community"] for n in payload["nodes"]}
    graph = MovieGraph(model=payload["model"], nodes=nodes, edges=edges)
    return graph, CommunityAssignment(membership=membership, modularity=0.0)
