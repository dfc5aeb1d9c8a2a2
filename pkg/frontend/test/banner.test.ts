import { beforeEach, describe, expect, it, vi } from "vitest";

import {
  clearMount,
  displayName,
  ensureMount,
  renderBanner,
  renderOk,
  renderWarning,
} from "../src/banner";
import type { BannerActions } from "../src/banner";
import { toxicDoc } from "./helpers";

function setup(): { box: HTMLTextAreaElement; mount: HTMLElement; actions: BannerActions } {
  document.body.innerHTML = "";
  const box = document.createElement("textarea");
  document.body.appendChild(box);
  const mount = ensureMount(box);
  const actions = { onAccept: vi.fn(), onEdit: vi.fn(), onDismiss: vi.fn() };
  return { box, mount, actions };
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("displayName", () => {
  it("uses the served names for known categories", () => {
    expect(displayName("object_directed")).toBe("Object-Directed Toxicity");
    expect(displayName("bitter_frustration")).toBe("Bitter Frustration");
    expect(displayName("insult")).toBe("Insult");
  });

  it("prettifies unknown ids", () => {
    expect(displayName("veiled_condescension")).toBe("Veiled Condescension");
  });
});

describe("ensureMount", () => {
  it("creates the container once and reuses it", () => {
    const box = document.createElement("textarea");
    document.body.appendChild(box);
    const first = ensureMount(box);
    const second = ensureMount(box);
    expect(second).toBe(first);
    expect(box.nextElementSibling).toBe(first);
  });
});

describe("renderBanner", () => {
  it("lists category display names with their explanations", () => {
    const { mount, actions } = setup();
    renderBanner(mount, toxicDoc("hurry up, this is garbage"), actions);

    const items = [...mount.querySelectorAll(".rmod-cat")].map((li) => li.textContent);
    expect(items).toEqual([
      "Impatience: demands an instant turnaround",
      "Insult: belittles the author of the change",
    ]);
  });

  it("shows the suggested rewrite with Accept, Edit and Dismiss", () => {
    const { mount, actions } = setup();
    const doc = toxicDoc("this is garbage");
    renderBanner(mount, doc, actions);

    expect(mount.querySelector(".rmod-rewrite")?.textContent).toBe(doc.rewrite?.rewritten);
    (mount.querySelector(".rmod-accept") as HTMLButtonElement).click();
    (mount.querySelector(".rmod-edit") as HTMLButtonElement).click();
    (mount.querySelector(".rmod-dismiss") as HTMLButtonElement).click();
    expect(actions.onAccept).toHaveBeenCalledTimes(1);
    expect(actions.onEdit).toHaveBeenCalledTimes(1);
    expect(actions.onDismiss).toHaveBeenCalledTimes(1);
  });

  it("drops the category list when the parse failed", () => {
    const { mount, actions } = setup();
    const doc = toxicDoc("some draft");
    doc.assignment = {
      categories: ["insult"],
      explanations: { insult: "should not surface" },
      parse_status: "failed",
      warnings: ["both marker and categories present"],
      attempts: 2,
      raw_response: "mangled",
    };
    renderBanner(mount, doc, actions);

    expect(mount.querySelector(".rmod-headline")).not.toBeNull();
    expect(mount.querySelector(".rmod-cats")).toBeNull();
  });

  it("offers only Dismiss when no rewrite came back", () => {
    const { mount, actions } = setup();
    const doc = toxicDoc("bad draft");
    doc.rewrite = null;
    renderBanner(mount, doc, actions);

    expect(mount.querySelector(".rmod-accept")).toBeNull();
    expect(mount.querySelector(".rmod-edit")).toBeNull();
    expect(mount.querySelector(".rmod-dismiss")).not.toBeNull();
  });

  it("replaces whatever was rendered before", () => {
    const { mount, actions } = setup();
    renderOk(mount);
    renderBanner(mount, toxicDoc("bad"), actions);
    expect(mount.querySelectorAll(":scope > *")).toHaveLength(1);
    expect(mount.querySelector(".rmod-ok")).toBeNull();
  });
});

describe("status notes", () => {
  it("renders the unobtrusive ok note", () => {
    const { mount } = setup();
    renderOk(mount);
    expect(mount.querySelector(".rmod-ok")).not.toBeNull();
    expect(mount.querySelector(".rmod-banner")).toBeNull();
  });

  it("renders a warning without touching the box", () => {
    const { box, mount } = setup();
    box.value = "anything";
    renderWarning(mount, "Tone check unavailable. Posting is not affected.");
    expect(mount.querySelector(".rmod-warning")?.textContent).toContain("Posting is not affected");
    expect(box.value).toBe("anything");
    expect(box.disabled).toBe(false);
  });

  it("clearMount empties the container", () => {
    const { mount } = setup();
    renderOk(mount);
    clearMount(mount);
    expect(mount.children).toHaveLength(0);
  });
});
