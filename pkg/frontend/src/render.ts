// HTML renderers: pure string functions over service documents, so the
// displayed values are provably the service's own numbers.

import type {
  CandidatePreview,
  DimensionReport,
  IdentificationReport,
} from "./types.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export const BADGE_TEXT: Record<string, string> = {
  DID: "Direct identifier",
  QID: "Quasi-identifier",
  SA: "Sensitive attribute",
  NSA: "Non-sensitive",
};

/** Rows within one percentage point of a threshold get highlighted. */
export function nearThreshold(
  risk: number,
  alpha: number,
  beta: number,
): boolean {
  return Math.abs(risk - alpha) <= 1.0 || Math.abs(risk - beta) <= 1.0;
}

export function renderClassificationTable(
  report: IdentificationReport,
  overrides: Record<string, string> = {},
): string {
  const alpha = report.thresholds?.alpha_percent ?? NaN;
  const beta = report.thresholds?.beta_percent ?? NaN;
  // order is fixed to descending risk by the service; never re-sort here
  const rows = report.attributes
    .map((row) => {
      const boundary = nearThreshold(row.risk_rate_percent, alpha, beta)
        ? " boundary"
        : "";
      const override = overrides[row.attribute] ?? "";
      const options = ["", "DID", "QID", "SA", "NSA"]
        .map(
          (label) =>
            `<option value="${label}"${label === override ? " selected" : ""}>` +
            `${label === "" ? "auto" : label}</option>`,
        )
        .join("");
      return (
        `<tr class="cls-row${boundary}" data-attribute="${esc(row.attribute)}">` +
        `<td>${esc(row.attribute)}</td>` +
        `<td class="num">${row.risk_rate_percent.toFixed(2)}</td>` +
        `<td><span class="badge badge-${row.label}">` +
        `${BADGE_TEXT[row.label]}</span>` +
        (row.source === "manual-override"
          ? ` <span class="override-mark">override</span>`
          : "") +
        `</td>` +
        `<td><select class="override-select" aria-label="override for ` +
        `${esc(row.attribute)}">${options}</select></td></tr>`
      );
    })
    .join("");
  return (
    `<table class="classification"><thead><tr>` +
    `<th>Attribute</th><th>Re-identification risk (%)</th>` +
    `<th>Classification</th><th>Override</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderCandidateTable(report: DimensionReport): string {
  const rows = report.candidates
    .map((c) => {
      const starred = c.d === report.chosen_d;
      const classes = [
        "cand-row",
        c.feasible ? "feasible" : "infeasible",
        starred ? "chosen" : "",
      ]
        .filter(Boolean)
        .join(" ");
      const lText = Object.entries(c.l_per_sa)
        .map(([sa, l]) => `${esc(sa)}=${l}`)
        .join(", ");
      return (
        `<tr class="${classes}" data-d="${c.d}" tabindex="0">` +
        `<td>${starred ? "★ " : ""}${c.d}</td>` +
        `<td>${esc(c.deidentified_qids.join(", ")) || "—"}</td>` +
        `<td class="num">${c.k}</td>` +
        `<td>${lText || "—"}</td>` +
        `<td class="num">${c.t.toFixed(4)}</td>` +
        `<td class="num">${c.nue_percent.toFixed(2)}</td>` +
        `<td class="num">${c.inverse_nue_percent.toFixed(2)}</td>` +
        `<td class="num">${c.privacy_gain}</td>` +
        `<td>${c.feasible ? "yes" : "no"}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="candidates"><thead><tr>` +
    `<th>d</th><th>de-identified QIDs</th><th>k</th><th>l per SA</th>` +
    `<th>t</th><th>NUE %</th><th>inverse NUE %</th><th>privacy gain</th>` +
    `<th>feasible</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderPreview(preview: CandidatePreview): string {
  const head = preview.attributes
    .map((name) => `<th>${esc(name)}</th>`)
    .join("");
  const body = preview.rows
    .map(
      (row) =>
        `<tr>${row.map((cell) => `<td>${esc(cell)}</td>`).join("")}</tr>`,
    )
    .join("");
  return (
    `<h3>Anonymised sample (dimension ${preview.d}, first ` +
    `${preview.rows.length} rows)</h3>` +
    `<table class="preview"><thead><tr>${head}</tr></thead>` +
    `<tbody>${body}</tbody></table>`
  );
}

export function renderError(message: string): string {
  return `<p class="error" role="alert">${esc(message)}</p>`;
}
