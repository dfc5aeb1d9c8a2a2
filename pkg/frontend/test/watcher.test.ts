import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { watchCommentBox } from "../src/watcher";

function makeBox(): HTMLTextAreaElement {
  const box = document.createElement("textarea");
  document.body.appendChild(box);
  return box;
}

function type(box: HTMLTextAreaElement, value: string): void {
  box.value = value;
  box.dispatchEvent(new Event("input", { bubbles: true }));
}

describe("watchCommentBox", () => {
  beforeEach(() => {
    vi.useFakeTimers();
    document.body.innerHTML = "";
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("emits once after the pause", () => {
    const box = makeBox();
    const drafts: string[] = [];
    watchCommentBox(box, 500, (d) => drafts.push(d));

    type(box, "looks go");
    type(box, "looks good");
    vi.advanceTimersByTime(600);

    expect(drafts).toEqual(["looks good"]);
  });

  it("stays silent while typing continues", () => {
    const box = makeBox();
    const drafts: string[] = [];
    watchCommentBox(box, 500, (d) => drafts.push(d));

    for (let i = 1; i <= 8; i++) {
      type(box, "draft ".repeat(i));
      vi.advanceTimersByTime(400); // always shorter than the window
    }
    expect(drafts).toEqual([]);

    vi.advanceTimersByTime(500);
    expect(drafts).toEqual(["draft ".repeat(8)]);
  });

  it("dedupes identical consecutive drafts", () => {
    const box = makeBox();
    const drafts: string[] = [];
    watchCommentBox(box, 500, (d) => drafts.push(d));

    type(box, "pasted text");
    vi.advanceTimersByTime(600);
    // pasting the same content again leaves the value unchanged
    type(box, "pasted text");
    vi.advanceTimersByTime(600);

    expect(drafts).toEqual(["pasted text"]);
  });

  it("emits again once the text differs", () => {
    const box = makeBox();
    const drafts: string[] = [];
    watchCommentBox(box, 500, (d) => drafts.push(d));

    type(box, "first");
    vi.advanceTimersByTime(600);
    type(box, "second");
    vi.advanceTimersByTime(600);
    type(box, "first");
    vi.advanceTimersByTime(600);

    expect(drafts).toEqual(["first", "second", "first"]);
  });

  it("markEmitted keeps the next pause on that text silent", () => {
    const box = makeBox();
    const drafts: string[] = [];
    const watcher = watchCommentBox(box, 500, (d) => drafts.push(d));

    watcher.markEmitted("replaced by the suggestion");
    type(box, "replaced by the suggestion");
    vi.advanceTimersByTime(600);

    expect(drafts).toEqual([]);
  });

  it("dispose stops emissions", () => {
    const box = makeBox();
    const drafts: string[] = [];
    const watcher = watchCommentBox(box, 500, (d) => drafts.push(d));

    type(box, "about to go away");
    watcher.dispose();
    vi.advanceTimersByTime(600);

    expect(drafts).toEqual([]);
  });
});
