/**
 * Thin client for the moderation gateway HTTP API.
 *
 * Every response arrives in the envelope {ok, data | error{code, stage,
 * message}}. Moderation accepts an AbortSignal so a newer draft can cut
 * off the request for an older one.
 */

export type Verdict = {
  label: "toxic" | "non_toxic";
  confidence: number;
  threshold: number;
  backend_id: string;
  latency_ms: number;
  cached: boolean;
};

export type Assignment = {
  categories: string[];
  explanations: Record<string, string>;
  parse_status: "strict_ok" | "lenient_recovered" | "failed";
  warnings: string[];
  attempts: number;
  raw_response: string;
};

export type Rewrite = {
  original: string;
  rewritten: string;
  rationale: string;
  style_pass: boolean;
  fluency_score: number;
  content_similarity: number;
  attempts: number;
  code_preserved: boolean;
};

export type ModerationDoc = {
  comment_id: string;
  comment_hash: string;
  verdict: Verdict;
  assignment: Assignment | null;
  rewrite: Rewrite | null;
  cached: boolean;
};

export type FeedbackAction =
  | "accepted_rewrite"
  | "edited"
  | "dismissed"
  | "reported_false_positive";

export class GatewayError extends Error {
  readonly code: string;
  readonly stage: string | null;

  constructor(code: string, message: string, stage: string | null = null) {
    super(message);
    this.name = "GatewayError";
    this.code = code;
    this.stage = stage;
  }
}

type Envelope<T> =
  | { ok: true; data: T }
  | { ok: false; error: { code: string; stage: string | null; message: string } };

export class GatewayClient {
  private readonly baseUrl: string;
  private readonly authToken: string;

  constructor(baseUrl: string, authToken = "") {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.authToken = authToken;
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.authToken) headers["Authorization"] = `Bearer ${this.authToken}`;
    return headers;
  }

  private async post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify(body),
      signal,
    });
    let envelope: Envelope<T> | null = null;
    try {
      envelope = (await response.json()) as Envelope<T>;
    } catch {
      envelope = null;
    }
    if (!envelope || envelope.ok !== true) {
      if (envelope && envelope.ok === false && envelope.error) {
        const err = envelope.error;
        throw new GatewayError(err.code, err.message, err.stage ?? null);
      }
      throw new GatewayError("http_" + response.status, response.statusText || "request failed");
    }
    return envelope.data;
  }

  moderate(
    text: string,
    opts: { commentId?: string; wantRewrite?: boolean; signal?: AbortSignal } = {},
  ): Promise<ModerationDoc> {
    return this.post<ModerationDoc>(
      "/v1/moderate",
      {
        text,
        comment_id: opts.commentId ?? null,
        want_rewrite: opts.wantRewrite ?? true,
      },
      opts.signal,
    );
  }

  async sendFeedback(commentHash: string, action: FeedbackAction, note?: string): Promise<void> {
    await this.post<{ recorded: boolean }>("/v1/feedback", {
      comment_hash: commentHash,
      action,
      note: note ?? null,
    });
  }
}
