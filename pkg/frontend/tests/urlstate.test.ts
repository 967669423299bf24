import { describe, expect, it } from "vitest";

import { emptyFilters } from "../src/filters";
import { decodeHash, defaultState, encodeHash, type ViewState } from "../src/urlstate";

function state(partial: Partial<ViewState> = {}): ViewState {
  return { model: "fused", filters: emptyFilters(), selected: null, ...partial };
}

describe("URL hash round-trip", () => {
  it("encodes and decodes the default state", () => {
    const s = defaultState("fused");
    const decoded = decodeHash(encodeHash(s));
    expect(decoded).toEqual(s);
  });

  it("restores model, filters and selection", () => {
    const s = state({ selected: "mv004" });
    s.filters.genres.add("drama").add("crime");
    s.filters.directors.add("d2");
    s.filters.communities.add(1).add(0);
    s.filters.minWeight = 0.35;
    const decoded = decodeHash(encodeHash(s));
    expect(decoded.model).toBe("fused");
    expect([...decoded.filters.genres].sort()).toEqual(["crime", "drama"]);
    expect([...decoded.filters.directors]).toEqual(["d2"]);
    expect([...decoded.filters.communities].sort()).toEqual([0, 1]);
    expect(decoded.filters.minWeight).toBe(0.35);
    expect(decoded.selected).toBe("mv004");
  });

  it("re-encoding a decoded hash is a fixed point", () => {
    const s = state({ selected: "mv001" });
    s.filters.genres.add("western");
    s.filters.minWeight = 0.2;
    const hash = encodeHash(s);
    expect(encodeHash(decodeHash(hash))).toBe(hash);
  });

  it("values with separators survive the round trip", () => {
    const s = state();
    s.filters.genres.add("science fiction");
    s.filters.directors.add("A. B. & C=D");
    const decoded = decodeHash(encodeHash(s));
    expect(decoded.filters.genres.has("science fiction")).toBe(true);
    expect(decoded.filters.directors.has("A. B. & C=D")).toBe(true);
  });

  it("empty hash yields the empty state", () => {
    const decoded = decodeHash("");
    expect(decoded.model).toBe("");
    expect(decoded.selected).toBeNull();
    expect(decoded.filters.genres.size).toBe(0);
    expect(decoded.filters.minWeight).toBe(0);
  });

  it("ignores malformed numeric values", () => {
    const decoded = decodeHash("#model=lsi&community=abc&minWeight=oops");
    expect(decoded.filters.communities.size).toBe(0);
    expect(decoded.filters.minWeight).toBe(0);
    expect(decoded.model).toBe("lsi");
  });

  it("zero minimum weight is omitted from the hash", () => {
    const s = state();
    expect(encodeHash(s)).toBe("#model=fused");
  });
});
