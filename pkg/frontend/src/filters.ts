/**
 * Pure filter logic over a loaded movie graph.
 *
 * The rendered view is exactly the filter-satisfying subset: a node
 * survives when it matches every non-empty filter dimension, and an edge
 * survives when both endpoints survive and its weight is at least the
 * minimum edge weight.
 */

import type { GraphEdge, GraphNode, MovieGraph, NeighborEntry } from "./types";

export interface Filters {
  genres: Set<string>;
  directors: Set<string>;
  communities: Set<number>;
  minWeight: number;
}

export function emptyFilters(): Filters {
  return {
    genres: new Set(),
    directors: new Set(),
    communities: new Set(),
    minWeight: 0,
  };
}

export function filtersAreEmpty(filters: Filters): boolean {
  return (
    filters.genres.size === 0 &&
    filters.directors.size === 0 &&
    filters.communities.size === 0 &&
    filters.minWeight === 0
  );
}

function nodeMatches(node: GraphNode, filters: Filters): boolean {
  if (filters.genres.size > 0 && !node.genres.some((g) => filters.genres.has(g))) {
    return false;
  }
  if (
    filters.directors.size > 0 &&
    !node.directors.some((d) => filters.directors.has(d))
  ) {
    return false;
  }
  if (filters.communities.size > 0 && !filters.communities.has(node.community)) {
    return false;
  }
  return true;
}

/** The subgraph satisfying the filters; node and edge order is preserved. */
export function applyFilters(graph: MovieGraph, filters: Filters): MovieGraph {
  const nodes = graph.nodes.filter((n) => nodeMatches(n, filters));
  const kept = new Set(nodes.map((n) => n.id));
  const edges = graph.edges.filter(
    (e) => kept.has(e.a) && kept.has(e.b) && e.weight >= filters.minWeight,
  );
  return { model: graph.model, nodes, edges };
}

/**
 * Keep only filter values that exist in the given graph, so filters carry
 * over when switching models without silently blanking the view.
 */
export function reconcileFilters(graph: MovieGraph, filters: Filters): Filters {
  const genres = new Set<string>();
  const directors = new Set<string>();
  const communities = new Set<number>();
  for (const node of graph.nodes) {
    node.genres.forEach((g) => genres.add(g));
    node.directors.forEach((d) => directors.add(d));
    communities.add(node.community);
  }
  return {
    genres: new Set([...filters.genres].filter((g) => genres.has(g))),
    directors: new Set([...filters.directors].filter((d) => directors.has(d))),
    communities: new Set([...filters.communities].filter((c) => communities.has(c))),
    minWeight: filters.minWeight,
  };
}

/** Distinct filterable values of a graph, sorted for stable UI rendering. */
export function filterOptions(graph: MovieGraph): {
  genres: string[];
  directors: string[];
  communities: number[];
} {
  const genres = new Set<string>();
  const directors = new Set<string>();
  const communities = new Set<number>();
  for (const node of graph.nodes) {
    node.genres.forEach((g) => genres.add(g));
    node.directors.forEach((d) => directors.add(d));
    communities.add(node.community);
  }
  return {
    genres: [...genres].sort(),
    directors: [...directors].sort(),
    communities: [...communities].sort((x, y) => x - y),
  };
}

/**
 * Neighbors of a node ordered by descending edge weight (the model's
 * recommendations), ties broken by ascending movie id.
 */
export function neighborsOf(graph: MovieGraph, id: string): NeighborEntry[] {
  const titles = new Map(graph.nodes.map((n) => [n.id, n.title]));
  const entries: NeighborEntry[] = [];
  for (const edge of graph.edges) {
    const other = edge.a === id ? edge.b : edge.b === id ? edge.a : null;
    if (other !== null) {
      entries.push({ id: other, title: titles.get(other) ?? other, weight: edge.weight });
    }
  }
  entries.sort((x, y) => y.weight - x.weight || (x.id < y.id ? -1 : x.id > y.id ? 1 : 0));
  return entries;
}

export function edgeKey(edge: GraphEdge): string {
  return `${edge.a}--${edge.b}`;
}
