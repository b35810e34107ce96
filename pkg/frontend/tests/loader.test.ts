import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { AtlasClient, MAX_IN_FLIGHT, TileLoader } from "../src/api.js";
import { TileCoord } from "../src/pyramid.js";

function tile(i: number): TileCoord {
  return {
    plane: "parameter",
    n: 3,
    lambda: null,
    z: 4,
    tx: i,
    ty: 0,
    nMax: 100,
    coloring: "classification",
  };
}

describe("TileLoader", () => {
  let resolvers: Array<() => void>;
  let liveRequests: number;
  let peakRequests: number;

  beforeEach(() => {
    resolvers = [];
    liveRequests = 0;
    peakRequests = 0;
    vi.stubGlobal("fetch", (_url: string) => {
      liveRequests += 1;
      peakRequests = Math.max(peakRequests, liveRequests);
      return new Promise((resolve) => {
        resolvers.push(() => {
          liveRequests -= 1;
          resolve({
            ok: true,
            blob: async () => new Blob(),
          } as unknown as Response);
        });
      });
    });
    vi.stubGlobal("createImageBitmap", async () => ({}) as ImageBitmap);
  });

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("caps concurrent requests at MAX_IN_FLIGHT", async () => {
    const loader = new TileLoader(new AtlasClient("http://x"), () => {});
    for (let i = 0; i < 20; i++) loader.request(tile(i));
    expect(peakRequests).toBe(MAX_IN_FLIGHT);
    while (resolvers.length > 0) {
      resolvers.shift()!();
      await Promise.resolve();
      await Promise.resolve();
      await Promise.resolve();
    }
    await new Promise((r) => setTimeout(r, 0));
    expect(peakRequests).toBeLessThanOrEqual(MAX_IN_FLIGHT);
    for (let i = 0; i < 20; i++) {
      expect(loader.get(tile(i))).toBeDefined();
    }
  });

  it("drops queued requests from superseded generations", async () => {
    const painted: number[] = [];
    const loader = new TileLoader(new AtlasClient("http://x"), () =>
      painted.push(1),
    );
    for (let i = 0; i < 12; i++) loader.request(tile(i));
    expect(liveRequests).toBe(MAX_IN_FLIGHT);
    loader.newGeneration(); // view changed: the 4 queued tiles are stale
    while (resolvers.length > 0) {
      resolvers.shift()!();
      await Promise.resolve();
      await Promise.resolve();
      await Promise.resolve();
    }
    await new Promise((r) => setTimeout(r, 0));
    // the 8 already-in-flight tiles completed and were cached, but no
    // further requests were issued for the stale generation
    expect(liveRequests).toBe(0);
    for (let i = MAX_IN_FLIGHT; i < 12; i++) {
      expect(loader.get(tile(i))).toBeUndefined();
    }
  });

  it("deduplicates repeated requests", () => {
    const loader = new TileLoader(new AtlasClient("http://x"), () => {});
    loader.request(tile(0));
    loader.request(tile(0));
    loader.request(tile(0));
    expect(liveRequests).toBe(1);
  });
});
