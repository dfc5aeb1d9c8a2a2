/**
 * Content script. On pages matching the enabled-site patterns it
 * watches comment textareas (found via the configured selectors) and
 * sends each settled draft to the moderation gateway.
 *
 * Ground rules, independent of what the gateway says:
 *   - the draft is never modified without an explicit Accept
 *   - a gateway outage or slow answer never blocks typing or posting
 *   - at most one request is in flight per box; a newer draft cancels
 *     the older request
 *   - draft text lives only in page memory, nothing is persisted
 */

import { loadSettings, type ExtensionSettings } from "./settings";
import { GatewayClient, type ModerationDoc } from "./gateway";
import { hashDraft, pageEnabled } from "./util";
import { watchCommentBox, type DraftWatcher } from "./watcher";
import {
  clearMount,
  ensureMount,
  renderBanner,
  renderOk,
  renderWarning,
} from "./banner";

const ATTACHED_ATTR = "data-rmod-attached";

type BoxState = {
  box: HTMLTextAreaElement;
  watcher: DraftWatcher;
  mount: HTMLElement;
  inflight: AbortController | null;
  /** Draft hashes the user dismissed; kept for this page session only. */
  dismissed: Set<string>;
};

export type ModerationHarness = {
  /** Attach any comment boxes added since the last scan. Returns how many were attached. */
  scan: () => number;
  dispose: () => void;
};

let boxCounter = 0;

function logWarn(...args: unknown[]): void {
  console.warn("[reviewmod]", ...args);
}

function sendFeedbackSafe(
  client: GatewayClient,
  commentHash: string,
  action: "accepted_rewrite" | "dismissed",
): void {
  client.sendFeedback(commentHash, action).catch((err) => {
    // feedback is best-effort telemetry, never user-blocking
    logWarn("feedback not recorded:", err);
  });
}

function acceptRewrite(client: GatewayClient, state: BoxState, doc: ModerationDoc): void {
  const rewrite = doc.rewrite;
  if (!rewrite || !rewrite.rewritten) return;
  const text = rewrite.rewritten;
  state.box.value = text;
  state.box.setSelectionRange(text.length, text.length);
  state.box.focus();
  // the gateway already vetted this text, checking it again is noise
  state.watcher.markEmitted(text);
  state.box.dispatchEvent(new Event("input", { bubbles: true }));
  clearMount(state.mount);
  sendFeedbackSafe(client, doc.comment_hash, "accepted_rewrite");
}

function dismissVerdict(client: GatewayClient, state: BoxState, draft: string, doc: ModerationDoc): void {
  state.dismissed.add(hashDraft(draft));
  clearMount(state.mount);
  sendFeedbackSafe(client, doc.comment_hash, "dismissed");
}

function renderVerdict(client: GatewayClient, state: BoxState, draft: string, doc: ModerationDoc): void {
  // the user kept typing, this verdict is for an older draft
  if (state.box.value !== draft) return;
  if (doc.verdict.label !== "toxic") {
    renderOk(state.mount);
    return;
  }
  renderBanner(state.mount, doc, {
    onAccept: () => acceptRewrite(client, state, doc),
    onEdit: () => {
      state.box.focus();
    },
    onDismiss: () => dismissVerdict(client, state, draft, doc),
  });
}

function attachBox(
  box: HTMLTextAreaElement,
  settings: ExtensionSettings,
  client: GatewayClient,
): BoxState {
  const commentId = box.id ? `el-${box.id}` : `box-${++boxCounter}`;
  const mount = ensureMount(box);
  const state: BoxState = {
    box,
    watcher: undefined as unknown as DraftWatcher,
    mount,
    inflight: null,
    dismissed: new Set(),
  };

  const onDraft = (draft: string) => {
    if (state.inflight) {
      state.inflight.abort();
      state.inflight = null;
    }
    if (!draft.trim()) {
      clearMount(mount);
      return;
    }
    if (state.dismissed.has(hashDraft(draft))) {
      clearMount(mount);
      return;
    }
    const controller = new AbortController();
    state.inflight = controller;
    client
      .moderate(draft, {
        commentId,
        wantRewrite: settings.autoSuggestRewrite,
        signal: controller.signal,
      })
      .then((doc) => {
        if (state.inflight === controller) state.inflight = null;
        renderVerdict(client, state, draft, doc);
      })
      .catch((err) => {
        if (controller.signal.aborted) return;
        if (state.inflight === controller) state.inflight = null;
        logWarn("gateway unreachable:", err);
        renderWarning(mount, "Tone check unavailable. Posting is not affected.");
      });
  };

  state.watcher = watchCommentBox(box, settings.debounceMs, onDraft);
  return state;
}

function findBoxes(root: ParentNode, selectors: string[]): HTMLTextAreaElement[] {
  const found: HTMLTextAreaElement[] = [];
  for (const selector of selectors) {
    let nodes: NodeListOf<Element>;
    try {
      nodes = root.querySelectorAll(selector);
    } catch {
      continue; // a bad selector from settings must not break the page
    }
    for (const node of nodes) {
      if (node instanceof HTMLTextAreaElement && !node.hasAttribute(ATTACHED_ATTR)) {
        found.push(node);
      }
    }
  }
  return found;
}

/**
 * Wire up moderation for a document. Returns null when the page does
 * not match the enabled-site patterns; the script then does nothing.
 */
export function initModeration(
  doc: Document,
  settings: ExtensionSettings,
  client: GatewayClient,
): ModerationHarness | null {
  const pageUrl = doc.location ? doc.location.href : "";
  if (!pageEnabled(pageUrl, settings.sitePatterns)) return null;

  const states: BoxState[] = [];

  const scan = (): number => {
    const boxes = findBoxes(doc, settings.selectors);
    for (const box of boxes) {
      box.setAttribute(ATTACHED_ATTR, "1");
      states.push(attachBox(box, settings, client));
    }
    return boxes.length;
  };

  scan();

  // comment boxes often render late, watch for them
  const observer = new MutationObserver(() => {
    scan();
  });
  if (doc.body) observer.observe(doc.body, { childList: true, subtree: true });

  return {
    scan,
    dispose: () => {
      observer.disconnect();
      for (const state of states) {
        state.watcher.dispose();
        if (state.inflight) state.inflight.abort();
        state.mount.remove();
        state.box.removeAttribute(ATTACHED_ATTR);
      }
      states.length = 0;
    },
  };
}

// boot only inside a real extension page
if (typeof chrome !== "undefined" && chrome.storage && typeof document !== "undefined") {
  void (async () => {
    try {
      const settings = await loadSettings();
      const client = new GatewayClient(settings.gatewayUrl, settings.authToken);
      initModeration(document, settings, client);
    } catch (err) {
      logWarn("failed to start:", err);
    }
  })();
}
