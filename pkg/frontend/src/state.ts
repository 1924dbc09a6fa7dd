// Workbench state machine. Every field mirrors the latest service
// response; nothing here computes a metric.

import { ApiClient, LatestWins } from "./api.js";
import type {
  CandidatePreview,
  DimensionReport,
  IdentificationReport,
  RuleDoc,
  SchemaAttribute,
} from "./types.js";

export interface WorkbenchState {
  sessionId: string | null;
  rowCount: number;
  attributes: string[];
  alpha: number;
  beta: number;
  policy: "max_nue" | "smallest_d";
  overrides: Record<string, string>;
  identification: IdentificationReport | null;
  dimensions: DimensionReport | null;
  preview: CandidatePreview | null;
  exportReady: boolean;
  error: string | null;
}

export function initialState(): WorkbenchState {
  return {
    sessionId: null,
    rowCount: 0,
    attributes: [],
    alpha: 25.0,
    beta: 1.0,
    policy: "max_nue",
    overrides: {},
    identification: null,
    dimensions: null,
    preview: null,
    exportReady: false,
    error: null,
  };
}

/** Orchestrates service calls and keeps only the newest response. */
export class Workbench {
  readonly state: WorkbenchState = initialState();
  private readonly identificationGuard = new LatestWins();
  private readonly dimensionsGuard = new LatestWins();

  constructor(private readonly api: ApiClient) {}

  async upload(
    name: string,
    csv: string,
    schema: SchemaAttribute[],
  ): Promise<void> {
    const response = await this.api.createSession(name, csv, schema);
    this.state.sessionId = response.session_id;
    this.state.rowCount = response.row_count;
    this.state.attributes = response.attributes;
    this.state.identification = null;
    this.state.dimensions = null;
    this.state.preview = null;
    this.state.exportReady = false;
    this.state.error = null;
  }

  /** Commit thresholds and refetch the classification (latest wins). */
  async setThresholds(alpha: number, beta: number): Promise<boolean> {
    if (!this.state.sessionId) return false;
    const token = this.identificationGuard.next();
    this.state.alpha = alpha;
    this.state.beta = beta;
    try {
      await this.api.putConfig(this.state.sessionId, {
        thresholds: { alpha_percent: alpha, beta_percent: beta },
      });
      const report = await this.api.identification(this.state.sessionId);
      if (!this.identificationGuard.isCurrent(token)) return false;
      this.state.identification = report;
      this.state.dimensions = null; // config changed; candidates are stale
      this.state.exportReady = false;
      this.state.error = null;
      return true;
    } catch (err) {
      if (!this.identificationGuard.isCurrent(token)) return false;
      this.state.error = String((err as Error).message ?? err);
      return false;
    }
  }

  async setOverride(attribute: string, label: string): Promise<boolean> {
    if (!this.state.sessionId) return false;
    if (label === "") {
      delete this.state.overrides[attribute];
    } else {
      this.state.overrides[attribute] = label;
    }
    try {
      await this.api.putOverrides(this.state.sessionId, this.state.overrides);
      this.state.identification = await this.api.identification(
        this.state.sessionId,
      );
      this.state.dimensions = null;
      this.state.exportReady = false;
      this.state.error = null;
      return true;
    } catch (err) {
      this.state.error = String((err as Error).message ?? err);
      return false;
    }
  }

  async setRules(rules: RuleDoc[]): Promise<boolean> {
    if (!this.state.sessionId) return false;
    try {
      await this.api.putRules(this.state.sessionId, rules);
      this.state.dimensions = null;
      this.state.exportReady = false;
      this.state.error = null;
      return true;
    } catch (err) {
      this.state.error = String((err as Error).message ?? err);
      return false;
    }
  }

  async setPolicy(policy: "max_nue" | "smallest_d"): Promise<boolean> {
    if (!this.state.sessionId) return false;
    this.state.policy = policy;
    try {
      await this.api.putConfig(this.state.sessionId, { policy });
      return this.refreshDimensions();
    } catch (err) {
      this.state.error = String((err as Error).message ?? err);
      return false;
    }
  }

  async refreshDimensions(): Promise<boolean> {
    if (!this.state.sessionId) return false;
    const token = this.dimensionsGuard.next();
    try {
      const report = await this.api.dimensions(this.state.sessionId);
      if (!this.dimensionsGuard.isCurrent(token)) return false;
      this.state.dimensions = report;
      this.state.exportReady = true;
      this.state.error = null;
      return true;
    } catch (err) {
      if (!this.dimensionsGuard.isCurrent(token)) return false;
      this.state.error = String((err as Error).message ?? err);
      this.state.exportReady = false;
      return false;
    }
  }

  async loadPreview(d: number): Promise<boolean> {
    if (!this.state.sessionId) return false;
    try {
      this.state.preview = await this.api.preview(this.state.sessionId, d);
      return true;
    } catch (err) {
      this.state.error = String((err as Error).message ?? err);
      return false;
    }
  }
}
