import { describe, expect, it } from "vitest";

import {
  applyFilters,
  emptyFilters,
  filterOptions,
  filtersAreEmpty,
  neighborsOf,
  reconcileFilters,
} from "../src/filters";
import type { MovieGraph } from "../src/types";
import demoGraph from "./fixtures/demo_graph.json";
import pipelineExport from "./fixtures/pipeline_export.json";

const graph = demoGraph as MovieGraph;

/** Independent subgraph oracle: plain loops over the fixture JSON. */
function expectedSubgraph(
  wantedGenres: string[],
  wantedCommunities: number[],
  minWeight: number,
): { nodeIds: string[]; edgeKeys: string[] } {
  const nodeIds = graph.nodes
    .filter(
      (n) =>
        (wantedGenres.length === 0 || n.genres.some((g) => wantedGenres.includes(g))) &&
        (wantedCommunities.length === 0 || wantedCommunities.includes(n.community)),
    )
    .map((n) => n.id);
  const edgeKeys = graph.edges
    .filter(
      (e) =>
        nodeIds.includes(e.a) && nodeIds.includes(e.b) && e.weight >= minWeight,
    )
    .map((e) => `${e.a}--${e.b}`);
  return { nodeIds, edgeKeys };
}

describe("applyFilters", () => {
  it("returns the full graph for empty filters", () => {
    const view = applyFilters(graph, emptyFilters());
    expect(view.nodes).toEqual(graph.nodes);
    expect(view.edges).toEqual(graph.edges);
  });

  it("genre filter keeps exactly the western-tagged nodes", () => {
    const filters = emptyFilters();
    filters.genres.add("western");
    const view = applyFilters(graph, filters);
    const oracle = expectedSubgraph(["western"], [], 0);
    expect(view.nodes.map((n) => n.id)).toEqual(oracle.nodeIds);
    expect(view.edges.map((e) => `${e.a}--${e.b}`)).toEqual(oracle.edgeKeys);
    expect(view.nodes.map((n) => n.id)).toEqual(["mv000", "mv001", "mv002"]);
  });

  it("community filter keeps exactly that community's subgraph", () => {
    const filters = emptyFilters();
    filters.communities.add(1);
    const view = applyFilters(graph, filters);
    const oracle = expectedSubgraph([], [1], 0);
    expect(view.nodes.map((n) => n.id)).toEqual(oracle.nodeIds);
    expect(view.edges.map((e) => `${e.a}--${e.b}`)).toEqual(oracle.edgeKeys);
  });

  it("minimum weight drops weak edges but keeps nodes", () => {
    const filters = emptyFilters();
    filters.minWeight = 0.7;
    const view = applyFilters(graph, filters);
    expect(view.nodes).toHaveLength(graph.nodes.length);
    const oracle = expectedSubgraph([], [], 0.7);
    expect(view.edges.map((e) => `${e.a}--${e.b}`)).toEqual(oracle.edgeKeys);
    expect(view.edges.every((e) => e.weight >= 0.7)).toBe(true);
  });

  it("combined genre + community + weight matches the oracle", () => {
    const filters = emptyFilters();
    filters.genres.add("drama");
    filters.communities.add(1);
    filters.minWeight = 0.6;
    const view = applyFilters(graph, filters);
    const oracle = expectedSubgraph(["drama"], [1], 0.6);
    expect(view.nodes.map((n) => n.id)).toEqual(oracle.nodeIds);
    expect(view.edges.map((e) => `${e.a}--${e.b}`)).toEqual(oracle.edgeKeys);
  });

  it("director filter intersects with node directors", () => {
    const filters = emptyFilters();
    filters.directors.add("d3");
    const view = applyFilters(graph, filters);
    expect(view.nodes.map((n) => n.id)).toEqual(["mv005", "mv006", "mv007"]);
  });

  it("empty result set is a valid state", () => {
    const filters = emptyFilters();
    filters.genres.add("musical");
    const view = applyFilters(graph, filters);
    expect(view.nodes).toEqual([]);
    expect(view.edges).toEqual([]);
  });

  it("does not mutate the input graph", () => {
    const before = JSON.stringify(graph);
    const filters = emptyFilters();
    filters.genres.add("crime");
    filters.minWeight = 0.8;
    applyFilters(graph, filters);
    expect(JSON.stringify(graph)).toBe(before);
  });

  it("clearing filters restores the full graph", () => {
    const filters = emptyFilters();
    filters.genres.add("crime");
    filters.minWeight = 0.5;
    expect(applyFilters(graph, filters).nodes.length).toBeLessThan(graph.nodes.length);
    const cleared = emptyFilters();
    expect(filtersAreEmpty(cleared)).toBe(true);
    const view = applyFilters(graph, cleared);
    expect(view.nodes).toEqual(graph.nodes);
    expect(view.edges).toEqual(graph.edges);
  });
});

describe("neighborsOf", () => {
  it("lists neighbors in descending edge-weight order, matching the fixture", () => {
    const neighbors = neighborsOf(graph, "mv003");
    // independent oracle: collect incident edges from the JSON and sort
    const incident = graph.edges
      .filter((e) => e.a === "mv003" || e.b === "mv003")
      .map((e) => ({ id: e.a === "mv003" ? e.b : e.a, weight: e.weight }))
      .sort((x, y) => y.weight - x.weight || x.id.localeCompare(y.id));
    expect(neighbors.map((n) => ({ id: n.id, weight: n.weight }))).toEqual(incident);
    expect(neighbors.map((n) => n.id)).toEqual(["mv004", "mv005", "mv009", "mv002"]);
  });

  it("breaks equal weights by ascending movie id", () => {
    const neighbors = neighborsOf(graph, "mv008");
    const weights = neighbors.map((n) => n.weight);
    expect(weights).toEqual([...weights].sort((a, b) => b - a));
    const tied = neighbors.filter((n) => n.weight === 0.7).map((n) => n.id);
    expect(tied).toEqual(["mv006", "mv007"]);
  });

  it("respects the active filter subgraph", () => {
    const filters = emptyFilters();
    filters.minWeight = 0.8;
    const view = applyFilters(graph, filters);
    const neighbors = neighborsOf(view, "mv003");
    expect(neighbors.map((n) => n.id)).toEqual(["mv004", "mv005"]);
  });

  it("returns an empty list for isolated nodes", () => {
    const filters = emptyFilters();
    filters.genres.add("drama");
    filters.communities.add(2);
    const view = applyFilters(graph, filters);
    expect(view.nodes.map((n) => n.id)).toEqual(["mv008"]);
    expect(neighborsOf(view, "mv008")).toEqual([]);
  });
});

describe("reconcileFilters", () => {
  it("drops values that do not exist in the new graph", () => {
    const filters = emptyFilters();
    filters.genres.add("western");
    filters.genres.add("noir");
    filters.directors.add("d1");
    filters.directors.add("unknown");
    filters.communities.add(1);
    filters.communities.add(9);
    filters.minWeight = 0.4;
    const reconciled = reconcileFilters(graph, filters);
    expect([...reconciled.genres]).toEqual(["western"]);
    expect([...reconciled.directors]).toEqual(["d1"]);
    expect([...reconciled.communities]).toEqual([1]);
    expect(reconciled.minWeight).toBe(0.4);
  });
});

describe("pipeline export compatibility", () => {
  const exported = pipelineExport as MovieGraph;

  it("parses the graph-export schema produced by the pipeline", () => {
    expect(exported.model).toBeTypeOf("string");
    for (const node of exported.nodes) {
      expect(Object.keys(node)).toEqual([
        "id", "title", "score", "genres", "directors", "community",
      ]);
    }
    for (const edge of exported.edges) {
      expect(Object.keys(edge)).toEqual(["a", "b", "weight"]);
    }
  });

  it("filters and neighbor lists work over the exported graph", () => {
    const options = filterOptions(exported);
    expect(options.genres.length).toBeGreaterThan(0);
    const filters = emptyFilters();
    filters.genres.add(options.genres[0]);
    const view = applyFilters(exported, filters);
    expect(view.nodes.every((n) => n.genres.includes(options.genres[0]))).toBe(true);
    if (view.edges.length > 0) {
      const first = view.nodes[0];
      const neighbors = neighborsOf(view, first.id);
      const weights = neighbors.map((n) => n.weight);
      expect(weights).toEqual([...weights].sort((a, b) => b - a));
    }
  });
});
