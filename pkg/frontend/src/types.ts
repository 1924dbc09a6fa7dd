// Document shapes mirrored from the service responses. The UI renders
// these verbatim and never derives a metric of its own.

export type Label = "DID" | "QID" | "SA" | "NSA";

export interface ClassificationRow {
  attribute: string;
  risk_rate_percent: number;
  distinct_count: number;
  label: Label;
  source: "automatic" | "manual-override";
}

export interface IdentificationReport {
  thresholds?: { alpha_percent: number; beta_percent: number };
  attributes: ClassificationRow[];
}

export interface CandidateRow {
  d: number;
  deidentified_qids: string[];
  feasible: boolean;
  k: number;
  l_per_sa: Record<string, number>;
  t: number;
  t_per_sa: Record<string, number>;
  nue_percent: number;
  inverse_nue_percent: number;
  privacy_gain: number;
}

export interface DimensionReport {
  policy: "max_nue" | "smallest_d";
  chosen_d: number;
  compliant: boolean;
  candidates: CandidateRow[];
}

export interface UploadResponse {
  session_id: string;
  row_count: number;
  attributes: string[];
}

export interface CandidatePreview {
  d: number;
  attributes: string[];
  rows: string[][];
}

export interface SchemaAttribute {
  name: string;
  kind: "numeric" | "year" | "categorical" | "free-text";
  declared_role?: Label;
}

export interface RuleDoc {
  attribute: string;
  strategy: string;
  [param: string]: unknown;
}
