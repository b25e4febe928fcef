/**
 * DOM wiring for the shape-function editor.
 *
 * Load a model file, pick a feature, drag bins or run range edits,
 * preview/commit monotonize, probe what-if rows, undo/redo, export.
 * All state lives in EditorState; this file only reflects it into the DOM.
 */

import { renderChart } from "./chart.js";
import { EditorState } from "./editor.js";
import { ModelFormatError, type Direction } from "./modelFormat.js";
import type { RowValue } from "./scoring.js";

let state: EditorState | null = null;
let pendingOverlay: { feature: string; direction: Direction; values: number[] } | null = null;
let dragBase: number[] | null = null;

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;

function banner(message: string, isError: boolean): void {
  const node = $("banner");
  node.textContent = message;
  node.className = isError ? "banner error" : "banner";
  node.hidden = message === "";
}

function selectedEntry() {
  return state!.doc.features.find((f) => f.name === state!.selectedFeature)!;
}

function refresh(): void {
  if (!state) return;
  banner("", false);
  renderFeatureList();
  renderMeta();
  renderSelected();
  renderWhatIfForm();
  ($("undo-btn") as HTMLButtonElement).disabled = !state.canUndo;
  ($("redo-btn") as HTMLButtonElement).disabled = !state.canRedo;
  $("editor").hidden = false;
}

function renderMeta(): void {
  const doc = state!.doc;
  const privacy = doc.privacy
    ? `(ε=${doc.privacy.epsilon}, δ=${doc.privacy.delta}) ${doc.privacy.accountant}`
    : "non-private";
  $("model-meta").textContent =
    `${doc.link} link · ${doc.features.length} features · ${privacy} · ` +
    `${doc.edit_log.length} edits logged`;
}

function renderFeatureList(): void {
  const list = $("feature-list");
  list.textContent = "";
  for (const f of state!.doc.features) {
    const item = document.createElement("button");
    item.type = "button";
    item.textContent = `${f.name} (${f.kind === "numeric" ? f.shape.length + " bins" : f.vocabulary!.length + " cats"})`;
    item.className = f.name === state!.selectedFeature ? "feature selected" : "feature";
    item.addEventListener("click", () => {
      state!.selectedFeature = f.name;
      pendingOverlay = null;
      refresh();
    });
    list.appendChild(item);
  }
}

function renderSelected(): void {
  const entry = selectedEntry();
  $("feature-title").textContent = entry.name;
  const overlay = pendingOverlay && pendingOverlay.feature === entry.name
    ? pendingOverlay.values : null;
  renderChart($("chart"), entry, overlay, {
    onBinEdit: (bin, value, commit) => {
      if (!dragBase) dragBase = [...entry.shape];
      if (commit) {
        const base = dragBase;
        dragBase = null;
        entry.shape[bin] = base[bin]; // restore preview before the real edit
        state!.editBins(entry.name, bin, bin + 1, { set: value });
        refresh();
      } else {
        entry.shape[bin] = value; // live preview only; not logged
        renderSelected();
      }
    },
  });
  ($("monotonize-commit") as HTMLButtonElement).disabled = pendingOverlay === null;
  const rangeHint = $("range-hint");
  rangeHint.textContent = entry.kind === "numeric"
    ? `bins 0..${entry.shape.length}`
    : `bins 0..${entry.shape.length} (${entry.vocabulary!.join(", ")})`;
}

function renderWhatIfForm(): void {
  const form = $("whatif-inputs");
  form.textContent = "";
  for (const f of state!.doc.features) {
    const label = document.createElement("label");
    label.textContent = f.name;
    if (f.kind === "numeric") {
      const input = document.createElement("input");
      input.type = "number";
      input.step = "any";
      input.name = f.name;
      input.value = String(f.edges![0]);
      label.appendChild(input);
    } else {
      const select = document.createElement("select");
      select.name = f.name;
      for (const cat of f.vocabulary!) {
        const opt = document.createElement("option");
        opt.value = cat;
        opt.textContent = cat;
        select.appendChild(opt);
      }
      label.appendChild(select);
    }
    form.appendChild(label);
  }
}

function runWhatIf(): void {
  if (!state) return;
  const row: RowValue[] = state.doc.features.map((f) => {
    const field = document.querySelector<HTMLInputElement | HTMLSelectElement>(
      `#whatif-inputs [name="${CSS.escape(f.name)}"]`)!;
    return f.kind === "numeric" ? Number(field.value) : field.value;
  });
  try {
    const result = state.whatIf(row);
    const out = $("whatif-result");
    out.textContent = "";
    const head = document.createElement("div");
    head.className = "whatif-head";
    head.textContent = `prediction ${result.prediction.toPrecision(6)} ` +
      `(raw score ${result.rawScore.toPrecision(6)})`;
    out.appendChild(head);
    const table = document.createElement("table");
    for (const c of result.contributions) {
      const tr = document.createElement("tr");
      tr.innerHTML = `<td>${c.feature}</td><td>bin ${c.bin}</td>` +
        `<td class="${c.score >= 0 ? "pos" : "neg"}">${c.score.toPrecision(5)}</td>`;
      table.appendChild(tr);
    }
    out.appendChild(table);
  } catch (e) {
    banner((e as Error).message, true);
  }
}

function wire(): void {
  $("file-input").addEventListener("change", async (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      state = EditorState.fromFile(await file.text());
      pendingOverlay = null;
      refresh();
      banner(`loaded ${file.name}`, false);
    } catch (e) {
      state = null;
      $("editor").hidden = true;
      const reason = e instanceof ModelFormatError ? e.message : `unexpected: ${e}`;
      banner(`cannot load model: ${reason}`, true);
    }
  });

  $("undo-btn").addEventListener("click", () => {
    if (state?.undo()) {
      pendingOverlay = null;
      refresh();
    }
  });
  $("redo-btn").addEventListener("click", () => {
    if (state?.redo()) {
      pendingOverlay = null;
      refresh();
    }
  });

  $("range-apply").addEventListener("click", () => {
    if (!state) return;
    const lo = Number(($("range-lo") as HTMLInputElement).value);
    const hi = Number(($("range-hi") as HTMLInputElement).value);
    const value = Number(($("range-value") as HTMLInputElement).value);
    const mode = ($("range-mode") as HTMLSelectElement).value;
    try {
      state.editBins(state.selectedFeature, lo, hi,
                     mode === "set" ? { set: value } : { delta: value });
      refresh();
    } catch (e) {
      banner((e as Error).message, true);
    }
  });

  $("monotonize-preview").addEventListener("click", () => {
    if (!state) return;
    const direction = ($("monotonize-dir") as HTMLSelectElement).value as Direction;
    try {
      pendingOverlay = {
        feature: state.selectedFeature,
        direction,
        values: state.previewMonotone(state.selectedFeature, direction),
      };
      renderSelected();
    } catch (e) {
      banner((e as Error).message, true);
    }
  });
  $("monotonize-commit").addEventListener("click", () => {
    if (!state || !pendingOverlay) return;
    state.monotonize(pendingOverlay.feature, pendingOverlay.direction);
    pendingOverlay = null;
    refresh();
  });

  $("whatif-run").addEventListener("click", runWhatIf);

  $("export-btn").addEventListener("click", () => {
    if (!state) return;
    const blob = new Blob([state.export()], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "model.edited.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });
}

wire();
