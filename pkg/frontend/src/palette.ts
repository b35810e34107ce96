/**
 * Tile palette, replicated exactly from the service (the legend must match
 * the rendered pixels byte for byte).
 */

export type RGB = [number, number, number];

export const COLOR_CANTOR: RGB = [0x40, 0x40, 0x40];
export const COLOR_CANTOR_CIRCLES: RGB = [0x1f, 0x77, 0xb4];
export const COLOR_NON_ESCAPING: RGB = [0x00, 0x00, 0x00];
export const COLOR_UNDETERMINED: RGB = [0xff, 0xff, 0xff];
export const CARPET_RAMP_START: RGB = [0xd6, 0x27, 0x28];
export const CARPET_RAMP_END: RGB = [0xff, 0xbf, 0x00];
export const CARPET_RAMP_SPAN = 7; // k = 3 .. 10 spans the ramp

export function carpetColor(k: number): RGB {
  const t = Math.min(Math.max(k - 3, 0), CARPET_RAMP_SPAN) / CARPET_RAMP_SPAN;
  return CARPET_RAMP_START.map((a, i) =>
    Math.round(a + (CARPET_RAMP_END[i] - a) * t),
  ) as RGB;
}

export function hex(rgb: RGB): string {
  return "#" + rgb.map((v) => v.toString(16).padStart(2, "0")).join("");
}

/** Human name for a survey/classify code (k >= 3 encodes Carpet(k)). */
export function tagOfCode(code: number): string {
  if (code === 0) return "Cantor";
  if (code === 2) return "CantorCircles";
  if (code === -1) return "NonEscaping";
  if (code === -2) return "Undetermined";
  if (code >= 3) return `Carpet(${code})`;
  return `?${code}`;
}

export interface LegendEntry {
  label: string;
  color: string;
}

export function legendEntries(): LegendEntry[] {
  return [
    { label: "Cantor", color: hex(COLOR_CANTOR) },
    { label: "Cantor circles", color: hex(COLOR_CANTOR_CIRCLES) },
    { label: "Carpet k=3", color: hex(carpetColor(3)) },
    { label: "Carpet k=6", color: hex(carpetColor(6)) },
    { label: "Carpet k≥10", color: hex(carpetColor(10)) },
    { label: "Non-escaping", color: hex(COLOR_NON_ESCAPING) },
    { label: "Undetermined", color: hex(COLOR_UNDETERMINED) },
  ];
}
