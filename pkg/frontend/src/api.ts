/** Typed client for the campaign service.
 *
 * Every endpoint answers with one envelope shape, either
 * `{"ok": true, "data": ..., "revision": n}` or
 * `{"ok": false, "error": {"code": ..., "message": ...}, "revision": n?}`.
 * The client unwraps it: successes come back as the data paired with the
 * echoed revision, failures become ApiError values carrying the server's
 * error code so callers can branch on "conflict" versus "validation"
 * without string matching.
 */

export interface VariableDoc {
  name: string;
  lower: number;
  upper: number;
  unit?: string;
}

export interface SpaceDoc {
  variables: VariableDoc[];
}

export interface ObjectiveDoc {
  name: string;
  sense: "maximize" | "minimize";
  output_index: number;
}

export interface ConstraintDoc {
  name: string;
  threshold: number;
  direction: "le" | "ge";
  output_index: number;
}

export interface Incumbent {
  row: number;
  value: number;
}

/** GET /campaigns/{id} and POST /campaigns payload. */
export interface CampaignSummary {
  id: string;
  space: SpaceDoc;
  output_names: string[];
  objectives: ObjectiveDoc[];
  constraints: ConstraintDoc[];
  n: number;
  revision: number;
  pending: number[][];
  observations: { points: number[][]; outputs: number[][] };
  trace: Array<number | null>;
  seed: number;
  incumbent?: Incumbent | null;
  pareto?: number[];
}

export interface AskResult {
  names: string[];
  points: number[][];
}

export interface TellResult {
  added: number;
  n: number;
  pending: number[][];
  trace: Array<number | null>;
}

export interface Recommendation {
  indices: number[];
  rationale: string;
  flagged: boolean;
  columns: string[];
  rows: number[][];
}

export interface ParetoResult {
  indices: number[];
  columns: string[];
  rows: number[][];
}

export interface SliceResult {
  dim: number;
  name: string;
  objective: string;
  anchor: number[];
  grid: number[];
  mean: number[];
  lower: number[];
  upper: number[];
}

/** Request bodies mirror the CLI's --json shapes; nothing UI-specific. */
export interface CreateCampaignRequest {
  space: SpaceDoc;
  objectives?: Array<{ name: string; sense?: string }>;
  constraints?: Array<{ name: string; threshold: number; direction?: string }>;
  seed?: number;
  request_id?: string;
}

export interface AskOptions {
  q?: number;
  seed?: number;
  strategy?: string;
  request_id?: string;
}

export interface TellOptions {
  revision?: number;
  request_id?: string;
}

export interface SliceOptions {
  dim?: number;
  points?: number;
  objective?: number;
}

/** Unwrapped envelope: the data plus the revision the server echoed. */
export interface Reply<T> {
  data: T;
  revision: number | null;
}

export class ApiError extends Error {
  override readonly name = "ApiError";

  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
    readonly revision: number | null = null,
  ) {
    super(message);
  }
}

export interface Api {
  createCampaign(req: CreateCampaignRequest): Promise<Reply<CampaignSummary>>;
  getCampaign(id: string): Promise<Reply<CampaignSummary>>;
  ask(id: string, opts?: AskOptions): Promise<Reply<AskResult>>;
  tell(
    id: string,
    rows: Array<Record<string, number>>,
    opts?: TellOptions,
  ): Promise<Reply<TellResult>>;
  recommend(id: string): Promise<Reply<Recommendation>>;
  pareto(id: string): Promise<Reply<ParetoResult>>;
  slice(id: string, opts?: SliceOptions): Promise<Reply<SliceResult>>;
}

/** Minimal structural view of fetch so the client never needs DOM types
 * and tests can hand in a plain stub. */
export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

interface ErrorDoc {
  code: string;
  message: string;
}

function errorDoc(value: unknown): ErrorDoc {
  if (typeof value === "object" && value !== null) {
    const doc = value as { code?: unknown; message?: unknown };
    if (typeof doc.code === "string" && typeof doc.message === "string") {
      return { code: doc.code, message: doc.message };
    }
  }
  return { code: "protocol", message: "malformed error payload" };
}

export class HttpApi implements Api {
  private readonly base: string;

  constructor(
    base: string,
    private readonly fetchFn: FetchLike,
  ) {
    this.base = base.replace(/\/+$/, "");
  }

  private async call<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<Reply<T>> {
    let res: { status: number; json(): Promise<unknown> };
    try {
      res = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (exc) {
      const reason = exc instanceof Error ? exc.message : String(exc);
      throw new ApiError("network", `service unreachable (${reason})`, 0);
    }

    let doc: unknown;
    try {
      doc = await res.json();
    } catch {
      throw new ApiError("protocol", `non-JSON response from ${path}`, res.status);
    }
    if (typeof doc !== "object" || doc === null || typeof (doc as { ok?: unknown }).ok !== "boolean") {
      throw new ApiError("protocol", `unexpected response shape from ${path}`, res.status);
    }
    const envelope = doc as {
      ok: boolean;
      data?: unknown;
      error?: unknown;
      revision?: unknown;
    };
    const revision = typeof envelope.revision === "number" ? envelope.revision : null;
    if (!envelope.ok) {
      const err = errorDoc(envelope.error);
      throw new ApiError(err.code, err.message, res.status, revision);
    }
    return { data: envelope.data as T, revision };
  }

  createCampaign(req: CreateCampaignRequest): Promise<Reply<CampaignSummary>> {
    return this.call("POST", "/campaigns", req);
  }

  getCampaign(id: string): Promise<Reply<CampaignSummary>> {
    return this.call("GET", `/campaigns/${encodeURIComponent(id)}`);
  }

  ask(id: string, opts: AskOptions = {}): Promise<Reply<AskResult>> {
    return this.call("POST", `/campaigns/${encodeURIComponent(id)}/ask`, opts);
  }

  tell(
    id: string,
    rows: Array<Record<string, number>>,
    opts: TellOptions = {},
  ): Promise<Reply<TellResult>> {
    return this.call("POST", `/campaigns/${encodeURIComponent(id)}/tell`, {
      rows,
      ...opts,
    });
  }

  recommend(id: string): Promise<Reply<Recommendation>> {
    return this.call("GET", `/campaigns/${encodeURIComponent(id)}/recommend`);
  }

  pareto(id: string): Promise<Reply<ParetoResult>> {
    return this.call("GET", `/campaigns/${encodeURIComponent(id)}/pareto`);
  }

  slice(id: string, opts: SliceOptions = {}): Promise<Reply<SliceResult>> {
    const query = new URLSearchParams();
    if (opts.dim !== undefined) query.set("dim", String(opts.dim));
    if (opts.points !== undefined) query.set("points", String(opts.points));
    if (opts.objective !== undefined) query.set("objective", String(opts.objective));
    const qs = query.toString();
    const suffix = qs === "" ? "" : `?${qs}`;
    return this.call("GET", `/campaigns/${encodeURIComponent(id)}/slice${suffix}`);
  }
}
