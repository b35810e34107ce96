/**
 * View state and its URL-fragment serialization.
 *
 * The fragment is the single source of truth for a shareable view: the
 * serialization is canonical (fixed key order, default-valued keys always
 * present, numbers via Number.prototype.toString), so
 * serialize(parse(s)) === s for every canonical fragment and two equal
 * states always produce byte-identical fragments — and therefore
 * byte-identical tile request URLs.
 */

export type Plane = "parameter" | "dynamical";
export type Overlay = "classification" | "escape_time";

export interface ComplexPoint {
  re: number;
  im: number;
}

export interface ViewState {
  plane: Plane;
  n: number;
  /** For dynamical-plane views: the map parameter. */
  lambda: ComplexPoint | null;
  cx: number;
  cy: number;
  /** Viewport width in plane units. */
  scale: number;
  nMax: number;
  overlay: Overlay;
  /** Currently selected parameter (classification panel), if any. */
  selected: ComplexPoint | null;
}

export const DEFAULT_STATE: ViewState = {
  plane: "parameter",
  n: 3,
  lambda: null,
  cx: 0,
  cy: 0,
  scale: 0.6,
  nMax: 1000,
  overlay: "classification",
  selected: null,
};

/** a+bi literal, no spaces; matches the service's command-line form. */
export function formatComplex(z: ComplexPoint): string {
  const sign = z.im < 0 ? "-" : "+";
  return `${z.re.toString()}${sign}${Math.abs(z.im).toString()}i`;
}

export function parseComplex(text: string): ComplexPoint {
  const m = /^([-+]?[0-9.]+(?:[eE][-+]?\d+)?)([-+][0-9.]+(?:[eE][-+]?\d+)?)i$/.exec(
    text,
  );
  if (!m) throw new Error(`not a complex literal (want a+bi): ${text}`);
  return { re: Number(m[1]), im: Number(m[2]) };
}

const KEY_ORDER = [
  "plane",
  "n",
  "lambda",
  "cx",
  "cy",
  "scale",
  "nmax",
  "overlay",
  "sel",
] as const;

export function serializeState(state: ViewState): string {
  const parts: string[] = [];
  const fields: Record<string, string | null> = {
    plane: state.plane,
    n: state.n.toString(),
    lambda: state.lambda ? formatComplex(state.lambda) : null,
    cx: state.cx.toString(),
    cy: state.cy.toString(),
    scale: state.scale.toString(),
    nmax: state.nMax.toString(),
    overlay: state.overlay,
    sel: state.selected ? formatComplex(state.selected) : null,
  };
  for (const key of KEY_ORDER) {
    const value = fields[key];
    if (value !== null) parts.push(`${key}=${encodeURIComponent(value)}`);
  }
  return parts.join("&");
}

export function parseState(fragment: string): ViewState {
  const text = fragment.startsWith("#") ? fragment.slice(1) : fragment;
  const state: ViewState = { ...DEFAULT_STATE };
  if (!text) return state;
  for (const part of text.split("&")) {
    const eq = part.indexOf("=");
    if (eq < 0) continue;
    const key = part.slice(0, eq);
    const value = decodeURIComponent(part.slice(eq + 1));
    switch (key) {
      case "plane":
        if (value !== "parameter" && value !== "dynamical")
          throw new Error(`bad plane: ${value}`);
        state.plane = value;
        break;
      case "n": {
        const n = Number(value);
        if (!Number.isInteger(n) || n < 3) throw new Error(`bad n: ${value}`);
        state.n = n;
        break;
      }
      case "lambda":
        state.lambda = parseComplex(value);
        break;
      case "cx":
        state.cx = Number(value);
        break;
      case "cy":
        state.cy = Number(value);
        break;
      case "scale": {
        const s = Number(value);
        if (!(s > 0)) throw new Error(`bad scale: ${value}`);
        state.scale = s;
        break;
      }
      case "nmax": {
        const m = Number(value);
        if (!Number.isInteger(m) || m < 1) throw new Error(`bad nmax: ${value}`);
        state.nMax = m;
        break;
      }
      case "overlay":
        if (value !== "classification" && value !== "escape_time")
          throw new Error(`bad overlay: ${value}`);
        state.overlay = value;
        break;
      case "sel":
        state.selected = parseComplex(value);
        break;
      default:
        break; // unknown keys are ignored so old links keep working
    }
  }
  if (state.plane === "dynamical" && !state.lambda)
    throw new Error("dynamical view needs lambda");
  return state;
}

export type Gesture =
  | { kind: "pan"; dx: number; dy: number } // plane units
  | { kind: "zoom"; factor: number; at?: { x: number; y: number } }
  | { kind: "select"; at: ComplexPoint }
  | {
      kind: "set_param";
      n?: number;
      nMax?: number;
      overlay?: Overlay;
      plane?: Plane;
      lambda?: ComplexPoint | null;
    };

/** Pure state transition for the supported gestures. */
export function navigate(state: ViewState, gesture: Gesture): ViewState {
  switch (gesture.kind) {
    case "pan":
      return { ...state, cx: state.cx + gesture.dx, cy: state.cy + gesture.dy };
    case "zoom": {
      const scale = state.scale / gesture.factor;
      if (!gesture.at) return { ...state, scale };
      // keep the anchor point fixed on screen
      const cx = gesture.at.x + (state.cx - gesture.at.x) / gesture.factor;
      const cy = gesture.at.y + (state.cy - gesture.at.y) / gesture.factor;
      return { ...state, cx, cy, scale };
    }
    case "select":
      return { ...state, selected: gesture.at };
    case "set_param":
      return {
        ...state,
        ...(gesture.n !== undefined ? { n: gesture.n } : {}),
        ...(gesture.nMax !== undefined ? { nMax: gesture.nMax } : {}),
        ...(gesture.overlay !== undefined ? { overlay: gesture.overlay } : {}),
        ...(gesture.plane !== undefined ? { plane: gesture.plane } : {}),
        ...(gesture.lambda !== undefined ? { lambda: gesture.lambda } : {}),
      };
  }
}
