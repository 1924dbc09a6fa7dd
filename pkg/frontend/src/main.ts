// DOM wiring for the workbench: upload, threshold sliders, override
// toggles, rule editor, tradeoff view, export. Keyboard reachable
// throughout (native controls plus focusable candidate rows).

import { ApiClient, debounce } from "./api.js";
import { renderTradeoffChart } from "./chart.js";
import {
  renderCandidateTable,
  renderClassificationTable,
  renderError,
  renderPreview,
} from "./render.js";
import { Workbench } from "./state.js";
import type { RuleDoc, SchemaAttribute } from "./types.js";

const api = new ApiClient("");
const workbench = new Workbench(api);

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function renderAll(): void {
  const state = workbench.state;
  el("session-info").textContent = state.sessionId
    ? `session ${state.sessionId.slice(0, 8)} — ${state.rowCount} rows`
    : "no dataset loaded";
  el("error-box").innerHTML = state.error ? renderError(state.error) : "";

  const classification = el("classification-panel");
  classification.innerHTML = state.identification
    ? renderClassificationTable(state.identification, state.overrides)
    : "<p>Upload a dataset to see its risk classification.</p>";
  classification
    .querySelectorAll<HTMLSelectElement>(".override-select")
    .forEach((select) => {
      select.addEventListener("change", async () => {
        const row = select.closest<HTMLTableRowElement>("tr");
        const attribute = row?.dataset.attribute;
        if (attribute !== undefined) {
          await workbench.setOverride(attribute, select.value);
          renderAll();
        }
      });
    });

  const dims = el("dimension-panel");
  if (state.dimensions) {
    dims.innerHTML =
      renderTradeoffChart(state.dimensions) +
      renderCandidateTable(state.dimensions);
    dims.querySelectorAll<HTMLTableRowElement>(".cand-row").forEach((row) => {
      const open = async () => {
        const d = Number(row.dataset.d);
        if (await workbench.loadPreview(d)) {
          el("preview-panel").innerHTML = renderPreview(
            workbench.state.preview!,
          );
        } else {
          renderAll();
        }
      };
      row.addEventListener("click", open);
      row.addEventListener("keydown", (event) => {
        if (event.key === "Enter" || event.key === " ") {
          event.preventDefault();
          void open();
        }
      });
    });
  } else {
    dims.innerHTML =
      "<p>Assign rules and evaluate to see the dimension tradeoff.</p>";
  }

  (el("export-button") as HTMLButtonElement).disabled = !state.exportReady;
}

const commitThresholds = debounce(async () => {
  const alpha = Number((el("alpha-slider") as HTMLInputElement).value);
  const beta = Number((el("beta-slider") as HTMLInputElement).value);
  if (beta > alpha) {
    // snap back instead of sending an invalid pair
    (el("beta-slider") as HTMLInputElement).value = String(
      workbench.state.beta,
    );
    workbench.state.error = "beta must not exceed alpha";
    renderAll();
    return;
  }
  await workbench.setThresholds(alpha, beta);
  renderAll();
}, 250);

function wireControls(): void {
  for (const id of ["alpha-slider", "beta-slider"]) {
    const slider = el<HTMLInputElement>(id);
    slider.addEventListener("input", () => {
      el(id + "-value").textContent = slider.value;
      commitThresholds();
    });
  }

  el<HTMLInputElement>("csv-file").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    const csv = await file.text();
    let schema: SchemaAttribute[];
    try {
      schema = JSON.parse(el<HTMLTextAreaElement>("schema-input").value)
        .attributes as SchemaAttribute[];
    } catch {
      workbench.state.error = "schema is not valid JSON";
      renderAll();
      return;
    }
    try {
      await workbench.upload(file.name, csv, schema);
      await workbench.setThresholds(workbench.state.alpha,
                                    workbench.state.beta);
    } catch (err) {
      workbench.state.error = String((err as Error).message ?? err);
    }
    renderAll();
  });

  el<HTMLButtonElement>("rules-apply").addEventListener("click", async () => {
    let rules: RuleDoc[];
    try {
      rules = JSON.parse(el<HTMLTextAreaElement>("rules-input").value)
        .rules as RuleDoc[];
    } catch {
      workbench.state.error = "rule set is not valid JSON";
      renderAll();
      return;
    }
    if (await workbench.setRules(rules)) {
      await workbench.refreshDimensions();
    }
    renderAll();
    if (workbench.state.error?.includes("not covered")) {
      el<HTMLTextAreaElement>("rules-input").focus();
    }
  });

  el<HTMLSelectElement>("policy-select").addEventListener(
    "change",
    async (ev) => {
      const policy = (ev.target as HTMLSelectElement).value as
        | "max_nue"
        | "smallest_d";
      await workbench.setPolicy(policy);
      renderAll();
    },
  );

  el<HTMLButtonElement>("export-button").addEventListener(
    "click",
    async () => {
      if (!workbench.state.sessionId) return;
      const csv = await api.exportCsv(workbench.state.sessionId);
      const blob = new Blob([csv], { type: "text/csv" });
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = "anonymised.csv";
      link.click();
      URL.revokeObjectURL(link.href);
    },
  );
}

document.addEventListener("DOMContentLoaded", () => {
  wireControls();
  renderAll();
});
