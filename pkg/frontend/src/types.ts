/** Graph JSON schema as written by the pipeline's graph-export stage. */

export interface GraphNode {
  id: string;
  title: string;
  score: number;
  genres: string[];
  directors: string[];
  community: number;
}

export interface GraphEdge {
  a: string;
  b: string;
  weight: number;
}

export interface MovieGraph {
  model: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

/** A neighbor entry for the detail panel, already weight-ordered. */
export interface NeighborEntry {
  id: string;
  title: string;
  weight: number;
}
