/**
 * Explorer application: loads exported graph JSON, renders a force-directed
 * view with community coloring and score-scaled nodes, and keeps filters,
 * selection and model choice in sync with the URL hash.
 */

import {
  forceCenter,
  forceCollide,
  forceLink,
  forceManyBody,
  forceSimulation,
  type SimulationLinkDatum,
  type SimulationNodeDatum,
} from "d3-force";

import {
  applyFilters,
  edgeKey,
  filterOptions,
  neighborsOf,
  reconcileFilters,
  type Filters,
} from "./filters";
import type { GraphNode, MovieGraph } from "./types";
import { decodeHash, defaultState, encodeHash, type ViewState } from "./urlstate";

const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

interface SimNode extends SimulationNodeDatum, GraphNode {}
type SimLink = SimulationLinkDatum<SimNode> & { weight: number; key: string };

function communityColor(community: number): string {
  return PALETTE[community % PALETTE.length];
}

function nodeRadius(score: number): number {
  return 4 + Math.max(score, 0) * 1.1;
}

export class ExplorerApp {
  private graph: MovieGraph | null = null;
  private state: ViewState = defaultState();
  private simulation: ReturnType<typeof forceSimulation<SimNode>> | null = null;
  private simNodes: SimNode[] = [];

  constructor(
    private root: HTMLElement,
    private dataUrl: (name: string) => string = (name) => `data/${name}`,
  ) {}

  async start(): Promise<void> {
    this.root.innerHTML = `
      <aside id="sidebar">
        <h1>Movie similarity explorer</h1>
        <label id="model-label">Model
          <select id="model-select"></select>
        </label>
        <div id="filters">
          <fieldset id="genre-filter"><legend>Genres</legend></fieldset>
          <fieldset id="director-filter"><legend>Directors</legend></fieldset>
          <fieldset id="community-filter"><legend>Communities</legend></fieldset>
          <label id="weight-label">Min edge weight
            <input id="weight-input" type="range" min="0" max="1" step="0.01" value="0" />
            <span id="weight-value">0</span>
          </label>
          <button id="clear-filters">Clear filters</button>
        </div>
      </aside>
      <main id="stage">
        <div id="error-banner" hidden></div>
        <svg id="graph-svg"></svg>
      </main>
      <aside id="detail-panel" hidden></aside>
    `;
    window.addEventListener("hashchange", () => this.onHashChange());

    const models = await this.loadModels();
    const fromHash = decodeHash(window.location.hash);
    this.state = fromHash.model ? fromHash : { ...fromHash, model: models[0] ?? "" };
    this.populateModelSelect(models);
    await this.loadModel(this.state.model);
  }

  private async loadModels(): Promise<string[]> {
    try {
      const response = await fetch(this.dataUrl("models.json"));
      if (!response.ok) throw new Error(`HTTP ${response.status}`);
      const payload = (await response.json()) as { models: string[] };
      return payload.models;
    } catch {
      this.showError("Could not load data/models.json; is the export directory mounted?");
      return [];
    }
  }

  private populateModelSelect(models: string[]): void {
    const select = this.root.querySelector<HTMLSelectElement>("#model-select")!;
    select.innerHTML = "";
    for (const model of models) {
      const option = document.createElement("option");
      option.value = model;
      option.textContent = model;
      select.append(option);
    }
    select.value = this.state.model;
    select.addEventListener("change", () => {
      this.state = { ...this.state, model: select.value, selected: null };
      void this.loadModel(select.value);
    });
  }

  async loadModel(model: string): Promise<void> {
    if (!model) return;
    try {
      const response = await fetch(this.dataUrl(`${model}.json`));
      if (!response.ok) throw new Error(`HTTP ${response.status}`);
      this.graph = (await response.json()) as MovieGraph;
      this.hideError();
    } catch {
      this.graph = null;
      this.showError(`Could not load model "${model}".`);
      return;
    }
    // carry filters over to the new model where its values still apply
    this.state = {
      ...this.state,
      model,
      filters: reconcileFilters(this.graph, this.state.filters),
    };
    this.syncHash();
    this.renderFilterControls();
    this.renderGraph();
    this.renderDetail();
  }

  private onHashChange(): void {
    const state = decodeHash(window.location.hash);
    const modelChanged = state.model !== this.state.model;
    this.state = state;
    if (modelChanged) {
      void this.loadModel(state.model);
    } else {
      this.renderFilterControls();
      this.renderGraph();
      this.renderDetail();
    }
  }

  private syncHash(): void {
    const hash = encodeHash(this.state);
    if (hash !== window.location.hash) {
      history.replaceState(null, "", hash || "#");
    }
  }

  private updateFilters(mutate: (filters: Filters) => void): void {
    const filters: Filters = {
      genres: new Set(this.state.filters.genres),
      directors: new Set(this.state.filters.directors),
      communities: new Set(this.state.filters.communities),
      minWeight: this.state.filters.minWeight,
    };
    mutate(filters);
    this.state = { ...this.state, filters };
    this.syncHash();
    this.renderGraph();
    this.renderDetail();
  }

  private renderFilterControls(): void {
    if (!this.graph) return;
    const options = filterOptions(this.graph);
    const check = (
      containerId: string,
      values: (string | number)[],
      active: (value: string | number) => boolean,
      toggle: (filters: Filters, value: string | number, on: boolean) => void,
      label: (value: string | number) => string = String,
    ) => {
      const container = this.root.querySelector<HTMLElement>(containerId)!;
      container.querySelectorAll("label").forEach((el) => el.remove());
      for (const value of values) {
        const wrapper = document.createElement("label");
        const box = document.createElement("input");
        box.type = "checkbox";
        box.checked = active(value);
        box.addEventListener("change", () =>
          this.updateFilters((filters) => toggle(filters, value, box.checked)),
        );
        wrapper.append(box, ` ${label(value)}`);
        container.append(wrapper);
      }
    };
    check("#genre-filter", options.genres,
      (v) => this.state.filters.genres.has(v as string),
      (f, v, on) => (on ? f.genres.add(v as string) : f.genres.delete(v as string)));
    check("#director-filter", options.directors,
      (v) => this.state.filters.directors.has(v as string),
      (f, v, on) => (on ? f.directors.add(v as string) : f.directors.delete(v as string)));
    check("#community-filter", options.communities,
      (v) => this.state.filters.communities.has(v as number),
      (f, v, on) => (on ? f.communities.add(v as number) : f.communities.delete(v as number)),
      (v) => `community ${v}`);

    const weightInput = this.root.querySelector<HTMLInputElement>("#weight-input")!;
    const weightValue = this.root.querySelector<HTMLElement>("#weight-value")!;
    weightInput.value = String(this.state.filters.minWeight);
    weightValue.textContent = weightInput.value;
    weightInput.oninput = () => {
      weightValue.textContent = weightInput.value;
      this.updateFilters((filters) => {
        filters.minWeight = Number(weightInput.value);
      });
    };
    this.root.querySelector<HTMLButtonElement>("#clear-filters")!.onclick = () =>
      this.updateFilters((filters) => {
        filters.genres.clear();
        filters.directors.clear();
        filters.communities.clear();
        filters.minWeight = 0;
      });
  }

  private renderGraph(): void {
    if (!this.graph) return;
    const svg = this.root.querySelector<SVGSVGElement>("#graph-svg")!;
    const { width, height } = svg.getBoundingClientRect();
    const w = width || 800;
    const h = height || 600;
    const view = applyFilters(this.graph, this.state.filters);

    const previous = new Map(this.simNodes.map((n) => [n.id, n]));
    this.simNodes = view.nodes.map((node) => ({
      ...node,
      x: previous.get(node.id)?.x ?? w / 2 + (Math.random() - 0.5) * 80,
      y: previous.get(node.id)?.y ?? h / 2 + (Math.random() - 0.5) * 80,
    }));
    const byId = new Map(this.simNodes.map((n) => [n.id, n]));
    const links: SimLink[] = view.edges.map((edge) => ({
      source: byId.get(edge.a)!,
      target: byId.get(edge.b)!,
      weight: edge.weight,
      key: edgeKey(edge),
    }));

    svg.innerHTML = "";
    const ns = "http://www.w3.org/2000/svg";
    const edgeGroup = document.createElementNS(ns, "g");
    const nodeGroup = document.createElementNS(ns, "g");
    svg.append(edgeGroup, nodeGroup);

    const lineFor = new Map<string, SVGLineElement>();
    for (const link of links) {
      const line = document.createElementNS(ns, "line");
      line.setAttribute("stroke", "#999");
      line.setAttribute("stroke-opacity", "0.6");
      line.setAttribute("stroke-width", String(0.5 + 2.5 * link.weight));
      edgeGroup.append(line);
      lineFor.set(link.key, line);
    }
    const circleFor = new Map<string, SVGCircleElement>();
    for (const node of this.simNodes) {
      const circle = document.createElementNS(ns, "circle");
      circle.setAttribute("r", String(nodeRadius(node.score)));
      circle.setAttribute("fill", communityColor(node.community));
      circle.setAttribute("stroke", node.id === this.state.selected ? "#111" : "#fff");
      circle.setAttribute("stroke-width", node.id === this.state.selected ? "3" : "1");
      circle.addEventListener("click", () => this.selectNode(node.id));
      const title = document.createElementNS(ns, "title");
      title.textContent = `${node.title} (${node.score})`;
      circle.append(title);
      nodeGroup.append(circle);
      circleFor.set(node.id, circle);
    }

    this.simulation?.stop();
    this.simulation = forceSimulation<SimNode>(this.simNodes)
      .force("charge", forceManyBody().strength(-60))
      .force(
        "link",
        forceLink<SimNode, SimLink>(links).distance((l) => 120 - 80 * l.weight),
      )
      .force("center", forceCenter(w / 2, h / 2))
      .force("collide", forceCollide<SimNode>((n) => nodeRadius(n.score) + 2))
      .on("tick", () => {
        for (const link of links) {
          const s = link.source as SimNode;
          const t = link.target as SimNode;
          const line = lineFor.get(link.key)!;
          line.setAttribute("x1", String(s.x ?? 0));
          line.setAttribute("y1", String(s.y ?? 0));
          line.setAttribute("x2", String(t.x ?? 0));
          line.setAttribute("y2", String(t.y ?? 0));
        }
        for (const node of this.simNodes) {
          const circle = circleFor.get(node.id)!;
          circle.setAttribute("cx", String(node.x ?? 0));
          circle.setAttribute("cy", String(node.y ?? 0));
        }
      });
  }

  selectNode(id: string | null): void {
    this.state = { ...this.state, selected: id };
    this.syncHash();
    this.renderGraph();
    this.renderDetail();
  }

  private renderDetail(): void {
    const panel = this.root.querySelector<HTMLElement>("#detail-panel")!;
    if (!this.graph || !this.state.selected) {
      panel.hidden = true;
      return;
    }
    const node = this.graph.nodes.find((n) => n.id === this.state.selected);
    if (!node) {
      panel.hidden = true;
      return;
    }
    const view = applyFilters(this.graph, this.state.filters);
    const neighbors = neighborsOf(view, node.id);
    panel.hidden = false;
    panel.innerHTML = `
      <button id="close-detail">×</button>
      <h2>${node.title}</h2>
      <dl>
        <dt>Score</dt><dd>${node.score}</dd>
        <dt>Genres</dt><dd>${node.genres.join(", ") || "—"}</dd>
        <dt>Directors</dt><dd>${node.directors.join(", ") || "—"}</dd>
        <dt>Community</dt><dd>${node.community}</dd>
      </dl>
      <h3>Nearest by this model</h3>
      <ol id="neighbor-list">
        ${neighbors
          .map(
            (n) =>
              `<li data-id="${n.id}">${n.title} <span class="weight">${n.weight.toFixed(3)}</span></li>`,
          )
          .join("")}
      </ol>
    `;
    panel.querySelector<HTMLButtonElement>("#close-detail")!.onclick = () =>
      this.selectNode(null);
    panel.querySelectorAll<HTMLLIElement>("#neighbor-list li").forEach((item) => {
      item.addEventListener("click", () => this.selectNode(item.dataset.id ?? null));
    });
  }

  private showError(message: string): void {
    const banner = this.root.querySelector<HTMLElement>("#error-banner")!;
    banner.textContent = message;
    banner.hidden = false;
  }

  private hideError(): void {
    this.root.querySelector<HTMLElement>("#error-banner")!.hidden = true;
  }
}
