import type {
  Assignment,
  Instrument,
  Progress,
  Scores,
  SubmitResult,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

/** Raised for any non-2xx response; carries the server's error code. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

async function parse<T>(resp: {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}): Promise<T> {
  const body = (await resp.json()) as Record<string, unknown>;
  if (!resp.ok) {
    throw new ApiError(
      resp.status,
      String(body["error"] ?? "http_error"),
      String(body["detail"] ?? ""),
    );
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base = "",
  ) {}

  instrument(): Promise<Instrument> {
    return this.get("/api/instrument");
  }

  assignment(respondentId: string): Promise<Assignment> {
    return this.get(
      `/api/assignment?respondent_id=${encodeURIComponent(respondentId)}`,
    );
  }

  progress(respondentId: string): Promise<Progress> {
    return this.get(
      `/api/progress?respondent_id=${encodeURIComponent(respondentId)}`,
    );
  }

  async submitRating(
    respondentId: string,
    articleId: string,
    scores: Scores,
  ): Promise<SubmitResult> {
    const resp = await this.fetchFn(`${this.base}/api/ratings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        respondent_id: respondentId,
        article_id: articleId,
        scores,
        submitted_at: new Date().toISOString(),
      }),
    });
    return parse<SubmitResult>(resp);
  }

  private async get<T>(path: string): Promise<T> {
    return parse<T>(await this.fetchFn(this.base + path));
  }
}
