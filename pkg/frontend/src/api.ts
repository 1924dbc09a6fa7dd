// Thin typed client for the workbench service. The fetch function is
// injectable so tests can feed recorded fixtures.

import type {
  CandidatePreview,
  DimensionReport,
  IdentificationReport,
  RuleDoc,
  SchemaAttribute,
  UploadResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly detail: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

async function parse<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail: Record<string, unknown> = {};
    let message = `${response.status}`;
    try {
      detail = await response.json();
      if (typeof detail.error === "string") message = detail.error;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ServiceError(response.status, message, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  createSession(
    name: string,
    csv: string,
    schema: SchemaAttribute[],
  ): Promise<UploadResponse> {
    return this.request<UploadResponse>("POST", "/sessions", {
      name,
      csv,
      schema,
    });
  }

  identification(
    sessionId: string,
    alpha?: number,
    beta?: number,
  ): Promise<IdentificationReport> {
    const params = new URLSearchParams();
    if (alpha !== undefined) params.set("alpha", String(alpha));
    if (beta !== undefined) params.set("beta", String(beta));
    const query = params.toString();
    return this.request<IdentificationReport>(
      "GET",
      `/sessions/${sessionId}/identification${query ? "?" + query : ""}`,
    );
  }

  putOverrides(
    sessionId: string,
    overrides: Record<string, string>,
  ): Promise<unknown> {
    return this.request("PUT", `/sessions/${sessionId}/overrides`, {
      overrides,
    });
  }

  putRules(sessionId: string, rules: RuleDoc[]): Promise<unknown> {
    return this.request("PUT", `/sessions/${sessionId}/rules`, { rules });
  }

  putConfig(
    sessionId: string,
    config: {
      thresholds?: { alpha_percent: number; beta_percent: number };
      constraints?: { k_min?: number; l_min?: number; t_max?: number };
      policy?: "max_nue" | "smallest_d";
    },
  ): Promise<unknown> {
    return this.request("PUT", `/sessions/${sessionId}/config`, config);
  }

  dimensions(sessionId: string): Promise<DimensionReport> {
    return this.request<DimensionReport>(
      "GET",
      `/sessions/${sessionId}/dimensions`,
    );
  }

  preview(sessionId: string, d: number): Promise<CandidatePreview> {
    return this.request<CandidatePreview>(
      "GET",
      `/sessions/${sessionId}/candidates/${d}/preview`,
    );
  }

  async exportCsv(sessionId: string): Promise<string> {
    const response = await this.fetchFn(
      `${this.base}/sessions/${sessionId}/export`,
    );
    if (!response.ok) {
      throw new ServiceError(response.status, `export failed`);
    }
    return response.text();
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.base}${path}`, init);
    return parse<T>(response);
  }
}

/** Latest-wins guard: stale async results are dropped, not rendered. */
export class LatestWins {
  private token = 0;

  next(): number {
    return ++this.token;
  }

  isCurrent(token: number): boolean {
    return token === this.token;
  }
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), waitMs);
  };
}
