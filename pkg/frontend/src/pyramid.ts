/**
 * Tile pyramid arithmetic.
 *
 * The plane is tiled by a fixed dyadic pyramid: at zoom level z, tiles
 * have side BASE_SCALE / 2^z plane units and tile (tx, ty) covers
 * [tx*side, (tx+1)*side) x [ty*side, (ty+1)*side).  Tile centers are
 * therefore quantized to the grid ((tx+0.5)*side, (ty+0.5)*side), which
 * maximizes cache hits: any two views that need the same region at the
 * same zoom request byte-identical tile URLs.
 */

import { ViewState, formatComplex } from "./state.js";

export const BASE_SCALE = 4.0;
export const TILE_SIZE = 256;

export interface TileCoord {
  plane: "parameter" | "dynamical";
  n: number;
  lambda: string | null; // a+bi literal for dynamical tiles
  z: number;
  tx: number;
  ty: number;
  nMax: number;
  coloring: "classification" | "escape_time";
}

export function tileScale(z: number): number {
  return BASE_SCALE / 2 ** z;
}

/**
 * Zoom level whose tiles render at >= 1 source pixel per canvas pixel:
 * smallest z with TILE_SIZE / tileScale(z) >= canvasWidth / state.scale.
 */
export function zoomLevelFor(viewScale: number, canvasWidth: number): number {
  const z = Math.ceil(
    Math.log2((BASE_SCALE * canvasWidth) / (viewScale * TILE_SIZE)),
  );
  return Math.max(0, Math.min(40, z));
}

export function tileKey(t: TileCoord): string {
  return [
    t.plane,
    t.n,
    t.lambda ?? "",
    t.z,
    t.tx,
    t.ty,
    t.nMax,
    t.coloring,
  ].join("/");
}

export function tileCenter(t: TileCoord): { x: number; y: number } {
  const s = tileScale(t.z);
  return { x: (t.tx + 0.5) * s, y: (t.ty + 0.5) * s };
}

/** Tile request path (relative to the service base URL). */
export function tilePath(t: TileCoord): string {
  const { x, y } = tileCenter(t);
  const params = new URLSearchParams();
  params.set("plane", t.plane);
  params.set("n", t.n.toString());
  if (t.plane === "dynamical" && t.lambda) params.set("lambda", t.lambda);
  params.set("cx", x.toString());
  params.set("cy", y.toString());
  params.set("scale", tileScale(t.z).toString());
  params.set("size", TILE_SIZE.toString());
  params.set("n_max", t.nMax.toString());
  params.set("coloring", t.coloring);
  return `/tile?${params.toString()}`;
}

/** The tiles covering the viewport of `state` on a canvas of given width. */
export function tilesForView(
  state: ViewState,
  canvasWidth: number,
  canvasHeight: number,
): TileCoord[] {
  const z = zoomLevelFor(state.scale, canvasWidth);
  const s = tileScale(z);
  const viewH = (state.scale * canvasHeight) / canvasWidth;
  const x0 = state.cx - state.scale / 2;
  const x1 = state.cx + state.scale / 2;
  const y0 = state.cy - viewH / 2;
  const y1 = state.cy + viewH / 2;
  const tiles: TileCoord[] = [];
  const lambda =
    state.plane === "dynamical" && state.lambda
      ? formatComplex(state.lambda)
      : null;
  const coloring = state.plane === "dynamical" ? "escape_time" : state.overlay;
  for (let ty = Math.floor(y0 / s); ty * s < y1; ty++) {
    for (let tx = Math.floor(x0 / s); tx * s < x1; tx++) {
      tiles.push({
        plane: state.plane,
        n: state.n,
        lambda,
        z,
        tx,
        ty,
        nMax: state.nMax,
        coloring,
      });
    }
  }
  return tiles;
}

/** Request paths for a view; the URL round-trip invariant compares these. */
export function requestPathsForView(
  state: ViewState,
  canvasWidth: number,
  canvasHeight: number,
): string[] {
  return tilesForView(state, canvasWidth, canvasHeight).map(tilePath);
}

/** The four children of a tile one zoom level deeper. */
export function childTiles(t: TileCoord): TileCoord[] {
  const out: TileCoord[] = [];
  for (const dy of [0, 1]) {
    for (const dx of [0, 1]) {
      out.push({ ...t, z: t.z + 1, tx: 2 * t.tx + dx, ty: 2 * t.ty + dy });
    }
  }
  return out;
}
