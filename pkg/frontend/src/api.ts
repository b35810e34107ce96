/**
 * Service client: classify calls plus a tile loader with a hard cap on
 * in-flight requests and generation tagging so responses for superseded
 * views are dropped instead of painted.
 *
 * The explorer never computes dynamics itself; every number shown in the
 * UI comes out of a service response.
 */

import { TileCoord, tileKey, tilePath } from "./pyramid.js";

export interface ClassifyReport {
  tag: string;
  k: number | null;
  escape_index: number | null;
  min_central_index: number | null;
  R: number;
  rho: number;
  n_max: number;
  steps_computed: number;
  stable: boolean | null;
  input_digest: string;
}

export const MAX_IN_FLIGHT = 8;

type FetchLike = (url: string) => Promise<Response>;

export class AtlasClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  async classify(
    n: number,
    lambda: string,
    nMax: number,
  ): Promise<ClassifyReport> {
    const params = new URLSearchParams();
    params.set("n", n.toString());
    params.set("lambda", lambda);
    params.set("n_max", nMax.toString());
    const resp = await this.fetchFn(`${this.baseUrl}/classify?${params}`);
    if (!resp.ok) {
      const body = await resp.text();
      throw new Error(`classify failed (${resp.status}): ${body}`);
    }
    return (await resp.json()) as ClassifyReport;
  }

  tileUrl(tile: TileCoord): string {
    return this.baseUrl + tilePath(tile);
  }
}

interface PendingTile {
  tile: TileCoord;
  generation: number;
}

/**
 * Queue of tile loads: at most MAX_IN_FLIGHT concurrent requests, decoded
 * tiles land in an in-memory cache keyed by the pyramid key, and any
 * response whose request generation is stale is discarded silently.
 */
export class TileLoader {
  private cache = new Map<string, ImageBitmap>();
  private pending: PendingTile[] = [];
  private inFlight = new Set<string>();
  private generation = 0;

  constructor(
    private readonly client: AtlasClient,
    private readonly onTile: () => void,
    private readonly cacheLimit = 512,
  ) {}

  /** Bump the generation: queued requests from older views are dropped. */
  newGeneration(): number {
    this.generation += 1;
    this.pending = [];
    return this.generation;
  }

  get(tile: TileCoord): ImageBitmap | undefined {
    return this.cache.get(tileKey(tile));
  }

  request(tile: TileCoord): void {
    const key = tileKey(tile);
    if (this.cache.has(key) || this.inFlight.has(key)) return;
    if (this.pending.some((p) => tileKey(p.tile) === key)) return;
    this.pending.push({ tile, generation: this.generation });
    this.pump();
  }

  private pump(): void {
    while (this.inFlight.size < MAX_IN_FLIGHT && this.pending.length > 0) {
      const next = this.pending.shift()!;
      if (next.generation !== this.generation) continue; // stale
      const key = tileKey(next.tile);
      if (this.cache.has(key) || this.inFlight.has(key)) continue;
      this.inFlight.add(key);
      this.load(next, key);
    }
  }

  private async load(entry: PendingTile, key: string): Promise<void> {
    try {
      const resp = await fetch(this.client.tileUrl(entry.tile));
      if (!resp.ok) throw new Error(`tile ${resp.status}`);
      const blob = await resp.blob();
      const bitmap = await createImageBitmap(blob);
      this.cache.set(key, bitmap);
      if (this.cache.size > this.cacheLimit) {
        const oldest = this.cache.keys().next().value;
        if (oldest !== undefined) this.cache.delete(oldest);
      }
      if (entry.generation === this.generation) this.onTile();
    } catch {
      // dropped tiles are re-requested by the next paint
    } finally {
      this.inFlight.delete(key);
      this.pump();
    }
  }
}
