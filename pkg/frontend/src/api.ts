// Typed client for the kgsq query service. Every number shown in the UI
// comes from these responses; nothing is scored locally.

export type EntityHit = {
  name: string;
  id: number;
  type: string | null;
};

export type ResultRow = {
  entity: string;
  type: string | null;
  score: number;
};

export type TrailStep = {
  positives: string[];
  negatives: string[];
  k: number;
  type_filter: string | null;
  results: ResultRow[];
};

export type TrailSummary = {
  session_id: string;
  anchor: string;
  steps: TrailStep[];
};

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly body: Record<string, unknown>,
  ) {
    super(`${code} (HTTP ${status})`);
  }
}

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

async function parse<T>(response: Response): Promise<T> {
  const body = (await response.json()) as Record<string, unknown>;
  if (!response.ok) {
    const code = typeof body.error === "string" ? body.error : `http_${response.status}`;
    throw new ServiceError(response.status, code, body);
  }
  return body as T;
}

export class Api {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchFn = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    return parse<T>(await this.fetchFn(this.baseUrl + path));
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    return parse<T>(
      await this.fetchFn(this.baseUrl + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      }),
    );
  }

  async health(): Promise<{ status: string; entities: number; dim: number }> {
    return this.get("/health");
  }

  async searchEntities(query: string, typeFilter: string | null, limit = 12): Promise<EntityHit[]> {
    if (!query) return [];
    const params = new URLSearchParams({ q: query, limit: String(limit) });
    if (typeFilter) params.set("type", typeFilter);
    const response = await this.fetchFn(`${this.baseUrl}/entities?${params}`);
    return parse<EntityHit[]>(response);
  }

  async createSession(entity: string): Promise<string> {
    const body = await this.post<{ session_id: string }>("/sessions", { entity });
    return body.session_id;
  }

  async step(
    sessionId: string,
    positives: string[],
    negatives: string[],
    k: number,
    typeFilter: string | null,
  ): Promise<{ results: ResultRow[]; step_index: number }> {
    return this.post(`/sessions/${sessionId}/step`, {
      positives,
      negatives,
      k,
      type_filter: typeFilter,
    });
  }

  async back(sessionId: string): Promise<TrailSummary> {
    return this.post(`/sessions/${sessionId}/back`, {});
  }

  async trail(sessionId: string): Promise<TrailSummary> {
    return this.get(`/sessions/${sessionId}`);
  }
}
