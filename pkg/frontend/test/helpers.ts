import type { ModerationDoc } from "../src/gateway";

/** Minimal chrome.storage.local stand-in backed by a plain object. */
export function installChromeStub(): Record<string, unknown> {
  const store: Record<string, unknown> = {};
  const local = {
    async get(key: string | string[]): Promise<Record<string, unknown>> {
      const keys = Array.isArray(key) ? key : [key];
      const out: Record<string, unknown> = {};
      for (const k of keys) {
        if (k in store) out[k] = store[k];
      }
      return out;
    },
    async set(items: Record<string, unknown>): Promise<void> {
      Object.assign(store, items);
    },
    async remove(key: string): Promise<void> {
      delete store[key];
    },
  };
  (globalThis as Record<string, unknown>).chrome = { storage: { local } };
  return store;
}

export function removeChromeStub(): void {
  delete (globalThis as Record<string, unknown>).chrome;
}

let hashCounter = 0;

export function toxicDoc(text: string, overrides: Partial<ModerationDoc> = {}): ModerationDoc {
  return {
    comment_id: "box-1",
    comment_hash: `hash-${++hashCounter}`,
    verdict: {
      label: "toxic",
      confidence: 0.91,
      threshold: 0.5,
      backend_id: "lexicon",
      latency_ms: 2.0,
      cached: false,
    },
    assignment: {
      categories: ["impatience", "insult"],
      explanations: {
        impatience: "demands an instant turnaround",
        insult: "belittles the author of the change",
      },
      parse_status: "strict_ok",
      warnings: [],
      attempts: 1,
      raw_response: "<categories/>",
    },
    rewrite: {
      original: text,
      rewritten: "Could you take another look at this part when you get a chance?",
      rationale: "removed the insult, kept the request",
      style_pass: true,
      fluency_score: 0.93,
      content_similarity: 0.82,
      attempts: 1,
      code_preserved: true,
    },
    cached: false,
    ...overrides,
  };
}

export function civilDoc(): ModerationDoc {
  return {
    comment_id: "box-1",
    comment_hash: `hash-${++hashCounter}`,
    verdict: {
      label: "non_toxic",
      confidence: 0.12,
      threshold: 0.5,
      backend_id: "lexicon",
      latency_ms: 1.5,
      cached: false,
    },
    assignment: null,
    rewrite: null,
    cached: false,
  };
}

/** fetch stub that routes by URL suffix and records every call. */
export type FetchStub = {
  fetch: typeof fetch;
  calls: { url: string; body: Record<string, unknown>; signal: AbortSignal | undefined }[];
  /** Queue the payload for the next /v1/moderate call; envelope added automatically. */
  queueModerate: (data: ModerationDoc | (() => Promise<ModerationDoc>)) => void;
  feedback: Record<string, unknown>[];
};

export function makeFetchStub(): FetchStub {
  const moderateQueue: (ModerationDoc | (() => Promise<ModerationDoc>))[] = [];
  const stub: FetchStub = {
    calls: [],
    feedback: [],
    queueModerate: (data) => {
      moderateQueue.push(data);
    },
    fetch: (async (url: RequestInfo | URL, init?: RequestInit) => {
      const urlStr = String(url);
      const body = JSON.parse(String(init?.body ?? "{}")) as Record<string, unknown>;
      const signal = init?.signal ?? undefined;
      stub.calls.push({ url: urlStr, body, signal: signal as AbortSignal | undefined });

      const respond = (payload: unknown) =>
        new Response(JSON.stringify(payload), {
          status: 200,
          headers: { "Content-Type": "application/json" },
        });

      if (urlStr.endsWith("/v1/moderate")) {
        const next = moderateQueue.shift();
        if (!next) throw new Error("no moderate response queued");
        const doc = typeof next === "function" ? await raceAbort(next(), signal) : next;
        return respond({ ok: true, data: doc });
      }
      if (urlStr.endsWith("/v1/feedback")) {
        stub.feedback.push(body);
        return respond({ ok: true, data: { recorded: true } });
      }
      throw new Error(`unexpected url ${urlStr}`);
    }) as typeof fetch,
  };
  return stub;
}

function raceAbort<T>(work: Promise<T>, signal: AbortSignal | undefined | null): Promise<T> {
  if (!signal) return work;
  return new Promise<T>((resolve, reject) => {
    const fail = () => reject(new DOMException("The operation was aborted.", "AbortError"));
    if (signal.aborted) {
      fail();
      return;
    }
    signal.addEventListener("abort", fail, { once: true });
    work.then(resolve, reject);
  });
}
