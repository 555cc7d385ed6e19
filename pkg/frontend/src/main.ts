// Wiring: connection, view, drag, atlas library, DOM controls.

import { AtlasDoc, AtlasLibrary, AtlasMismatchError, parseAtlas } from "./atlas.js";
import { SessionConnection } from "./connection.js";
import { DragController, SensitivityConfig } from "./drag.js";
import {
  ALL_MODES,
  HelloFrame,
  ModeText,
  SnapshotFrame,
  setModeFrame,
  setParamsFrame,
} from "./protocol.js";
import { Renderer } from "./renderer.js";
import { ViewState } from "./view.js";

const canvas = document.getElementById("stage") as HTMLCanvasElement;
const banner = document.getElementById("banner")!;
const classBadge = document.getElementById("class-badge")!;
const indicesBox = document.getElementById("indices")!;
const modeBox = document.getElementById("modes")!;
const sensitivitySelect = document.getElementById("sensitivity") as HTMLSelectElement;
const endpointInput = document.getElementById("endpoint") as HTMLInputElement;
const connectButton = document.getElementById("connect")!;
const atlasInput = document.getElementById("atlas-file") as HTMLInputElement;
const toggleBox = document.getElementById("toggles")!;

const view = new ViewState(canvas.width, canvas.height);
const renderer = new Renderer(canvas);
const atlases = new AtlasLibrary();
const drag = new DragController((text) => connection.send(text));

let hello: HelloFrame | null = null;
let latest: SnapshotFrame | null = null;
let currentMode: ModeText = "-+";
let sensitivity: SensitivityConfig = {
  sensitivity: "medium",
  scaleFactors: { rough: 2.0, medium: 1.0, fine: 0.5 },
  viewZoom: 1.0,
};

function showBanner(text: string, bad = true): void {
  banner.textContent = text;
  banner.className = bad ? "banner bad" : "banner ok";
  banner.classList.remove("hidden");
}

function hideBanner(): void {
  banner.classList.add("hidden");
}

let connection = new SessionConnection(wsUrl(), {
  onHello: handleHello,
  onSnapshot: (snap) => {
    latest = snap;
  },
  onError: (code, reason) => showBanner(`${code}: ${reason}`),
  onStatus: (status) => {
    if (status === "open") hideBanner();
    else if (status === "closed") showBanner("connection lost, retrying…");
    else showBanner("connecting…", false);
  },
});

function wsUrl(): string {
  return `ws://${endpointInput.value}/ws`;
}

function handleHello(frame: HelloFrame): void {
  hello = frame;
  currentMode = frame.session_config.mode;
  sensitivity = {
    sensitivity: frame.session_config.sensitivity,
    scaleFactors: frame.session_config.scale_factors,
    viewZoom: frame.session_config.view_zoom,
  };
  sensitivitySelect.value = sensitivity.sensitivity;
  const m = frame.model;
  const r = m.lengths.L1 + m.lengths.L2;
  view.fit(
    Math.min(m.base_a[0], m.base_b[0]) - r,
    Math.max(m.base_a[0], m.base_b[0]) + r,
    m.base_a[1] - r,
    m.base_a[1] + r,
  );
  renderModeSwitcher();
}

function renderModeSwitcher(): void {
  modeBox.innerHTML = "";
  for (const mode of ALL_MODES) {
    const btn = document.createElement("button");
    btn.textContent = mode;
    btn.className = mode === currentMode ? "mode active" : "mode";
    const hasAtlas = atlases.get(mode) !== undefined;
    btn.title = hasAtlas ? "atlas loaded" : "no atlas loaded for this mode";
    if (hasAtlas) btn.classList.add("has-atlas");
    btn.onclick = () => {
      currentMode = mode;
      connection.send(setModeFrame(mode));
      renderModeSwitcher();
    };
    modeBox.appendChild(btn);
  }
}

// --- overlays -----------------------------------------------------------

for (const name of ["heatmap", "isocurves", "boundary", "force", "linkage"] as const) {
  const label = document.createElement("label");
  const box = document.createElement("input");
  box.type = "checkbox";
  box.checked = view.overlays[name];
  box.onchange = () => {
    view.overlays[name] = box.checked;
  };
  label.appendChild(box);
  label.appendChild(document.createTextNode(name));
  toggleBox.appendChild(label);
}

atlasInput.onchange = async () => {
  const files = atlasInput.files;
  if (!files) return;
  for (const file of Array.from(files)) {
    try {
      const doc: AtlasDoc = parseAtlas(await file.text(), hello?.model_hash ?? null);
      atlases.add(doc);
      showBanner(`atlas loaded: ${doc.field} mode ${doc.mode}`, false);
    } catch (err) {
      if (err instanceof AtlasMismatchError) {
        showBanner(`atlas refused: ${err.message}`);
      } else {
        showBanner(`atlas unreadable: ${err}`);
      }
    }
  }
  renderModeSwitcher();
};

// --- pointer interaction --------------------------------------------------

canvas.addEventListener("pointerdown", (ev) => {
  if (ev.button === 0 && !ev.shiftKey) {
    drag.dragging = true;
    canvas.setPointerCapture(ev.pointerId);
    sendDrag(ev);
  }
});
canvas.addEventListener("pointermove", (ev) => {
  if (drag.dragging) sendDrag(ev);
  else if (ev.buttons === 4 || (ev.buttons === 1 && ev.shiftKey)) {
    view.panByPixels(ev.movementX, ev.movementY);
  }
});
canvas.addEventListener("pointerup", () => {
  drag.dragging = false;
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const rect = canvas.getBoundingClientRect();
  view.zoomAt(ev.clientX - rect.left, ev.clientY - rect.top, ev.deltaY > 0 ? 1.15 : 1 / 1.15);
  if (sensitivity.sensitivity === "screen") {
    sensitivity.viewZoom = view.zoom;
    connection.send(setParamsFrame({ view_zoom: view.zoom }));
  }
});

function sendDrag(ev: PointerEvent): void {
  const rect = canvas.getBoundingClientRect();
  const [wx, wy] = view.screenToWorld(ev.clientX - rect.left, ev.clientY - rect.top);
  drag.target(sensitivity, wx, wy);
}

sensitivitySelect.onchange = () => {
  sensitivity.sensitivity = sensitivitySelect.value;
  if (sensitivity.sensitivity === "screen") {
    sensitivity.viewZoom = view.zoom;
    connection.send(setParamsFrame({ sensitivity: "screen", view_zoom: view.zoom }));
  } else {
    connection.send(setParamsFrame({ sensitivity: sensitivity.sensitivity }));
  }
};

connectButton.addEventListener("click", () => {
  connection.close();
  connection = new SessionConnection(wsUrl(), {
    onHello: handleHello,
    onSnapshot: (snap) => {
      latest = snap;
    },
    onError: (code, reason) => showBanner(`${code}: ${reason}`),
    onStatus: (status) => {
      if (status === "open") hideBanner();
      else if (status === "closed") showBanner("connection lost, retrying…");
      else showBanner("connecting…", false);
    },
  });
  connection.connect();
});

// --- render loop ------------------------------------------------------------

function describeIndices(snap: SnapshotFrame): string {
  if (!snap.indices) return "out of workspace";
  const i = snap.indices;
  const ka = i.kappa_a === null ? "∞" : i.kappa_a.toFixed(3);
  const kb = i.kappa_b === null ? "∞" : i.kappa_b.toFixed(3);
  return (
    `κA=${ka} (1/κ=${i.inv_kappa_a.toFixed(3)})  ` +
    `κB=${kb} (1/κ=${i.inv_kappa_b.toFixed(3)})  ` +
    `boundary=${snap.boundary_dist.toFixed(3)}`
  );
}

function frame(): void {
  renderer.draw(view, hello?.model ?? null, latest, atlases.get(currentMode) ?? null);
  if (latest) {
    const cls = latest.out_of_workspace ? "out_of_workspace" : latest.class ?? "–";
    classBadge.textContent = cls;
    classBadge.className = `badge ${cls === "regular" ? "ok" : "alert"}`;
    indicesBox.textContent = describeIndices(latest);
  }
  requestAnimationFrame(frame);
}

connection.connect();
requestAnimationFrame(frame);
