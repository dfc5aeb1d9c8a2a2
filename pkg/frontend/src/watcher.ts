/**
 * Draft observation for one comment box.
 *
 * The handler fires once the user pauses for the debounce window, and
 * never twice in a row for the same text: pasting identical content
 * again, or programmatic churn that leaves the value unchanged, stays
 * silent.
 */

export type DraftHandler = (draft: string) => void;

export type DraftWatcher = {
  dispose: () => void;
  /** Record a value as already emitted so the next pause on it stays silent. */
  markEmitted: (draft: string) => void;
};

export function watchCommentBox(
  box: HTMLTextAreaElement,
  debounceMs: number,
  onDraft: DraftHandler,
): DraftWatcher {
  let timer: number | undefined;
  let lastEmitted: string | null = null;

  const fire = () => {
    timer = undefined;
    const draft = box.value;
    if (draft === lastEmitted) return;
    lastEmitted = draft;
    onDraft(draft);
  };

  const onInput = () => {
    if (timer !== undefined) window.clearTimeout(timer);
    timer = window.setTimeout(fire, debounceMs);
  };

  box.addEventListener("input", onInput);

  return {
    dispose: () => {
      box.removeEventListener("input", onInput);
      if (timer !== undefined) window.clearTimeout(timer);
      timer = undefined;
    },
    markEmitted: (draft: string) => {
      lastEmitted = draft;
    },
  };
}
