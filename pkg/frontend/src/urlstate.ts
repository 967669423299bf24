/**
 * Shareable view state in the URL hash:
 *   #model=fused&genre=drama&genre=crime&community=2&minWeight=0.3&selected=mv004
 *
 * Encoding and decoding are inverse up to value ordering (sets are sorted
 * on encode), so a decoded state re-encodes to the same hash.
 */

import { emptyFilters, type Filters } from "./filters";

export interface ViewState {
  model: string;
  filters: Filters;
  selected: string | null;
}

export function defaultState(model = ""): ViewState {
  return { model, filters: emptyFilters(), selected: null };
}

export function encodeHash(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.model) {
    params.append("model", state.model);
  }
  for (const genre of [...state.filters.genres].sort()) {
    params.append("genre", genre);
  }
  for (const director of [...state.filters.directors].sort()) {
    params.append("director", director);
  }
  for (const community of [...state.filters.communities].sort((a, b) => a - b)) {
    params.append("community", String(community));
  }
  if (state.filters.minWeight > 0) {
    params.append("minWeight", String(state.filters.minWeight));
  }
  if (state.selected) {
    params.append("selected", state.selected);
  }
  const text = params.toString();
  return text ? `#${text}` : "";
}

export function decodeHash(hash: string): ViewState {
  const text = hash.startsWith("#") ? hash.slice(1) : hash;
  const params = new URLSearchParams(text);
  const filters = emptyFilters();
  params.getAll("genre").forEach((g) => filters.genres.add(g));
  params.getAll("director").forEach((d) => filters.directors.add(d));
  params.getAll("community").forEach((c) => {
    const value = Number(c);
    if (Number.isInteger(value)) {
      filters.communities.add(value);
    }
  });
  const minWeight = Number(params.get("minWeight") ?? "0");
  filters.minWeight = Number.isFinite(minWeight) && minWeight > 0 ? minWeight : 0;
  return {
    model: params.get("model") ?? "",
    filters,
    selected: params.get("selected"),
  };
}
