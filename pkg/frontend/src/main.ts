/**
 * Browser entry point: canvas atlas with pan/zoom, click-to-classify, and
 * a dynamical-plane side panel, all URL-addressable via the fragment.
 */

import { AtlasClient, TileLoader } from "./api.js";
import { legendEntries, tagOfCode } from "./palette.js";
import {
  TILE_SIZE,
  tileCenter,
  tileScale,
  tilesForView,
} from "./pyramid.js";
import {
  DEFAULT_STATE,
  ViewState,
  formatComplex,
  navigate,
  parseState,
  serializeState,
} from "./state.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ??
  "http://127.0.0.1:8765";

const canvas = document.getElementById("atlas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const panel = document.getElementById("panel")!;
const statusLine = document.getElementById("status")!;

let state: ViewState = { ...DEFAULT_STATE };
const client = new AtlasClient(SERVICE_URL);
const loader = new TileLoader(client, () => paint());

function loadStateFromHash(): void {
  try {
    state = parseState(window.location.hash);
  } catch (err) {
    statusLine.textContent = `bad view URL (${err}); reset to default`;
    state = { ...DEFAULT_STATE };
  }
}

function pushState(next: ViewState): void {
  state = next;
  const fragment = serializeState(state);
  if (window.location.hash.slice(1) !== fragment) {
    history.replaceState(null, "", `#${fragment}`);
  }
  paint();
}

function planeToCanvas(x: number, y: number): [number, number] {
  const ppu = canvas.width / state.scale;
  const viewH = canvas.height / ppu;
  return [
    (x - (state.cx - state.scale / 2)) * ppu,
    canvas.height - (y - (state.cy - viewH / 2)) * ppu,
  ];
}

function canvasToPlane(px: number, py: number): { x: number; y: number } {
  const ppu = canvas.width / state.scale;
  const viewH = canvas.height / ppu;
  return {
    x: state.cx - state.scale / 2 + px / ppu,
    y: state.cy - viewH / 2 + (canvas.height - py) / ppu,
  };
}

function paint(): void {
  ctx.fillStyle = "#181818";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  loader.newGeneration();
  const tiles = tilesForView(state, canvas.width, canvas.height);
  const ppu = canvas.width / state.scale;
  for (const tile of tiles) {
    const bitmap = loader.get(tile);
    const s = tileScale(tile.z);
    const { x, y } = tileCenter(tile);
    const [cx0, cy0] = planeToCanvas(x - s / 2, y + s / 2);
    const sizePx = s * ppu;
    if (bitmap) {
      ctx.drawImage(bitmap, cx0, cy0, sizePx, sizePx);
    } else {
      loader.request(tile);
    }
  }
  statusLine.textContent =
    `${state.plane} plane · n=${state.n} · center ${state.cx.toPrecision(6)}` +
    `${state.cy < 0 ? "" : "+"}${state.cy.toPrecision(6)}i · ` +
    `width ${state.scale.toExponential(3)} · N=${state.nMax} · ` +
    `${tiles.length} tiles`;
}

async function select(at: { x: number; y: number }): Promise<void> {
  if (state.plane !== "parameter") return;
  pushState(navigate(state, { kind: "select", at: { re: at.x, im: at.y } }));
  const lambda = formatComplex({ re: at.x, im: at.y });
  panel.innerHTML = `<h3>λ = ${lambda}</h3><p>classifying…</p>`;
  try {
    const report = await client.classify(state.n, lambda, state.nMax);
    const tag =
      report.tag === "Carpet" ? tagOfCode(report.k ?? 3) : report.tag;
    const juliaUrl =
      `${SERVICE_URL}/tile?plane=dynamical&n=${state.n}` +
      `&lambda=${encodeURIComponent(lambda)}&cx=0&cy=0&scale=4` +
      `&size=${TILE_SIZE}&n_max=${Math.min(state.nMax, 200)}&coloring=escape_time`;
    panel.innerHTML = `
      <h3>λ = ${lambda}</h3>
      <table>
        <tr><td>tag</td><td><b>${tag}</b>${report.stable === false ? " (unstable)" : ""}</td></tr>
        <tr><td>escape index</td><td>${report.escape_index ?? "—"}</td></tr>
        <tr><td>last trap visit</td><td>${report.min_central_index ?? "—"}</td></tr>
        <tr><td>R / ρ</td><td>${report.R.toPrecision(6)} / ${report.rho.toPrecision(6)}</td></tr>
        <tr><td>budget</td><td>${report.n_max} (ran ${report.steps_computed})</td></tr>
      </table>
      <h4>Julia set</h4>
      <img width="${TILE_SIZE}" height="${TILE_SIZE}" src="${juliaUrl}"
           alt="dynamical plane render for ${lambda}">
      <p><button id="open-dynamical">Open dynamical plane</button></p>`;
    document.getElementById("open-dynamical")!.addEventListener("click", () => {
      pushState(
        navigate(state, {
          kind: "set_param",
          plane: "dynamical",
          lambda: { re: at.x, im: at.y },
        }),
      );
      pushState({ ...state, cx: 0, cy: 0, scale: 4 });
    });
  } catch (err) {
    panel.innerHTML = `<h3>λ = ${lambda}</h3>
      <p class="error">service error: ${err}</p>
      <p><button id="retry">Retry</button></p>`;
    document.getElementById("retry")!.addEventListener("click", () => select(at));
  }
}

function wireControls(): void {
  const nInput = document.getElementById("n") as HTMLInputElement;
  const nMaxInput = document.getElementById("nmax") as HTMLInputElement;
  const overlaySel = document.getElementById("overlay") as HTMLSelectElement;
  const backBtn = document.getElementById("back") as HTMLButtonElement;

  const syncInputs = () => {
    nInput.value = state.n.toString();
    nMaxInput.value = state.nMax.toString();
    overlaySel.value = state.overlay;
    backBtn.style.display = state.plane === "dynamical" ? "inline" : "none";
  };
  syncInputs();

  nInput.addEventListener("change", () =>
    pushState(navigate(state, { kind: "set_param", n: Number(nInput.value) })),
  );
  nMaxInput.addEventListener("change", () =>
    pushState(
      navigate(state, { kind: "set_param", nMax: Number(nMaxInput.value) }),
    ),
  );
  overlaySel.addEventListener("change", () =>
    pushState(
      navigate(state, {
        kind: "set_param",
        overlay: overlaySel.value as ViewState["overlay"],
      }),
    ),
  );
  backBtn.addEventListener("click", () =>
    pushState({
      ...navigate(state, { kind: "set_param", plane: "parameter", lambda: null }),
      cx: 0,
      cy: 0,
      scale: 0.6,
    }),
  );
  window.addEventListener("hashchange", () => {
    loadStateFromHash();
    syncInputs();
    paint();
  });

  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  let moved = false;
  canvas.addEventListener("mousedown", (ev) => {
    dragging = true;
    moved = false;
    lastX = ev.offsetX;
    lastY = ev.offsetY;
  });
  canvas.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    const ppu = canvas.width / state.scale;
    const dx = (lastX - ev.offsetX) / ppu;
    const dy = (ev.offsetY - lastY) / ppu;
    if (Math.abs(ev.offsetX - lastX) + Math.abs(ev.offsetY - lastY) > 2)
      moved = true;
    lastX = ev.offsetX;
    lastY = ev.offsetY;
    pushState(navigate(state, { kind: "pan", dx, dy: -dy }));
  });
  window.addEventListener("mouseup", (ev) => {
    if (dragging && !moved && ev.target === canvas) {
      const at = canvasToPlane(lastX, lastY);
      void select(at);
    }
    dragging = false;
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const factor = ev.deltaY < 0 ? 2 : 0.5;
    const at = canvasToPlane(ev.offsetX, ev.offsetY);
    pushState(navigate(state, { kind: "zoom", factor, at }));
  });

  const legend = document.getElementById("legend")!;
  legend.innerHTML = legendEntries()
    .map(
      (e) =>
        `<span class="chip"><i style="background:${e.color}"></i>${e.label}</span>`,
    )
    .join(" ");
}

loadStateFromHash();
wireControls();
paint();
