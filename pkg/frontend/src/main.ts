/**
 * DOM wiring for the explorer. All enhancement math happens on the
 * backend; this file only moves state between controls and the service.
 */

import { ApiError, Client } from "./api.js";
import { debounce, RequestGate } from "./debounce.js";
import { drawCurve, formatMatrix } from "./curveplot.js";
import {
  blockedReason,
  initialState,
  Mode,
  pushChain,
  removeChainAt,
  ResultParams,
  SessionState,
  withEndpoints,
  withImage,
  withMode,
  withResult,
  withStyle,
  withStyles,
  withT,
} from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const backendInput = $<HTMLInputElement>("backend-url");
const fileInput = $<HTMLInputElement>("file-input");
const modeRadios = Array.from(document.querySelectorAll<HTMLInputElement>("input[name=mode]"));
const styleSelect = $<HTMLSelectElement>("style-select");
const styleASelect = $<HTMLSelectElement>("style-a");
const styleBSelect = $<HTMLSelectElement>("style-b");
const slider = $<HTMLInputElement>("t-slider");
const sliderLabel = $<HTMLSpanElement>("t-value");
const chainAddSelect = $<HTMLSelectElement>("chain-add-select");
const chainAddButton = $<HTMLButtonElement>("chain-add");
const chainList = $<HTMLUListElement>("chain-list");
const beforeImg = $<HTMLImageElement>("before");
const afterImg = $<HTMLImageElement>("after");
const curveCanvas = $<HTMLCanvasElement>("curve-canvas");
const paramsLabel = $<HTMLSpanElement>("params-label");
const matrixTable = $<HTMLTableElement>("matrix");
const toast = $<HTMLDivElement>("toast");
const statusLine = $<HTMLSpanElement>("status");

let state: SessionState = initialState();
let client = new Client(backendInput.value || "http://127.0.0.1:8765");
const gate = new RequestGate();

function showToast(message: string): void {
  toast.textContent = message;
  toast.classList.add("visible");
  setTimeout(() => toast.classList.remove("visible"), 4000);
}

function fillSelect(select: HTMLSelectElement, options: string[], current: string | null): void {
  select.innerHTML = "";
  for (const name of options) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    select.appendChild(opt);
  }
  if (current !== null) select.value = current;
}

function renderControls(): void {
  fillSelect(styleSelect, state.styles, state.style);
  fillSelect(styleASelect, state.styles, state.styleA);
  fillSelect(styleBSelect, state.styles, state.styleB);
  fillSelect(chainAddSelect, state.styles, state.styles[0] ?? null);
  sliderLabel.textContent = state.t.toFixed(2);
  chainList.innerHTML = "";
  state.chain.forEach((name, i) => {
    const li = document.createElement("li");
    li.textContent = name;
    const del = document.createElement("button");
    del.textContent = "remove";
    del.addEventListener("click", () => {
      state = removeChainAt(state, i);
      renderControls();
      refresh();
    });
    li.appendChild(del);
    chainList.appendChild(li);
  });
  document.querySelectorAll<HTMLElement>("[data-mode]").forEach((panel) => {
    panel.hidden = panel.dataset.mode !== state.mode;
  });
}

function renderResult(): void {
  if (state.result === null) {
    afterImg.removeAttribute("src");
    paramsLabel.textContent = "";
    matrixTable.innerHTML = "";
    return;
  }
  afterImg.src = `data:image/png;base64,${state.result.image}`;
  const params = state.result.params;
  const ctx = curveCanvas.getContext("2d");
  if (params && ctx) {
    drawCurve(ctx, params.tf, curveCanvas.width, curveCanvas.height);
    paramsLabel.textContent = params.label;
    matrixTable.innerHTML = "";
    for (const row of formatMatrix(params.ccm)) {
      const tr = document.createElement("tr");
      for (const cell of row) {
        const td = document.createElement("td");
        td.textContent = cell;
        tr.appendChild(td);
      }
      matrixTable.appendChild(tr);
    }
  }
}

async function refresh(): Promise<void> {
  const blocked = blockedReason(state);
  if (blocked !== null) {
    statusLine.textContent = blocked;
    return;
  }
  statusLine.textContent = "requesting...";
  const signal = gate.begin();
  const image = state.imageB64 as string;
  try {
    let resultImage: string;
    let params: ResultParams | null;
    if (state.mode === "single") {
      const r = await client.enhance(image, state.style as string, signal);
      resultImage = r.image;
      params = { label: state.style as string, tf: r.tf, ccm: r.ccm };
    } else if (state.mode === "interpolate") {
      const r = await client.interpolate(
        image,
        state.styleA as string,
        state.styleB as string,
        state.t,
        signal,
      );
      resultImage = r.image;
      params = {
        label: `${state.styleA} ~ ${state.styleB} @ t=${state.t.toFixed(2)}`,
        tf: r.tf,
        ccm: r.ccm,
      };
    } else {
      const r = await client.chain(image, state.chain, signal);
      resultImage = r.image;
      const last = r.stages[r.stages.length - 1];
      params = last
        ? { label: `chain, last stage: ${last.style}`, tf: last.tf, ccm: last.ccm }
        : null;
    }
    if (!gate.isCurrent(signal)) return; // a newer request superseded this one
    state = withResult(state, resultImage, params);
    statusLine.textContent = "ok";
    renderResult();
  } catch (err) {
    if (signal.aborted) return;
    statusLine.textContent = "error";
    showToast(err instanceof ApiError ? `${err.status}: ${err.message}` : String(err));
  }
}

async function loadStyles(): Promise<void> {
  try {
    state = withStyles(state, await client.styles());
    renderControls();
    statusLine.textContent = `connected, ${state.styles.length} styles`;
  } catch (err) {
    showToast(`cannot reach backend: ${String(err)}`);
  }
}

backendInput.addEventListener("change", () => {
  client = new Client(backendInput.value);
  localStorage.setItem("pointops-backend", backendInput.value);
  void loadStyles();
});

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  const reader = new FileReader();
  reader.onload = () => {
    // data URL of the raw file bytes; the image is never re-encoded here
    const dataUrl = reader.result as string;
    const b64 = dataUrl.slice(dataUrl.indexOf(",") + 1);
    state = withImage(state, b64, file.name);
    beforeImg.src = dataUrl;
    renderResult();
    void refresh();
  };
  reader.readAsDataURL(file);
});

modeRadios.forEach((radio) =>
  radio.addEventListener("change", () => {
    if (radio.checked) {
      state = withMode(state, radio.value as Mode);
      renderControls();
      void refresh();
    }
  }),
);

styleSelect.addEventListener("change", () => {
  state = withStyle(state, styleSelect.value);
  void refresh();
});

const sliderRefresh = debounce(() => void refresh(), 180);
slider.addEventListener("input", () => {
  state = withT(state, Number(slider.value));
  sliderLabel.textContent = state.t.toFixed(2);
  sliderRefresh();
});

for (const select of [styleASelect, styleBSelect]) {
  select.addEventListener("change", () => {
    state = withEndpoints(state, styleASelect.value, styleBSelect.value);
    void refresh();
  });
}

chainAddButton.addEventListener("click", () => {
  if (chainAddSelect.value) {
    state = pushChain(state, chainAddSelect.value);
    renderControls();
    void refresh();
  }
});

const savedBackend = localStorage.getItem("pointops-backend");
if (savedBackend) {
  backendInput.value = savedBackend;
  client = new Client(savedBackend);
}
void loadStyles();
