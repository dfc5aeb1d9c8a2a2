/**
 * Verdict UI for one comment box: an unobtrusive ok note for civil
 * drafts, a non-blocking warning when the gateway is unreachable, and
 * a banner for flagged drafts listing the category names with their
 * explanations plus the suggested rewrite when one came back.
 *
 * Nothing here ever touches the draft text or the surrounding form;
 * posting stays possible in every state.
 */

import type { ModerationDoc } from "./gateway";

/** Readable names for the category ids the gateway reports. */
export const CATEGORY_NAMES: Record<string, string> = {
  profanity: "Profanity",
  insult: "Insult",
  trolling: "Trolling",
  object_directed: "Object-Directed Toxicity",
  entitlement: "Entitlement",
  arrogance: "Arrogance",
  mocking: "Mocking",
  threat: "Threat",
  identity_attack: "Identity Attack",
  bitter_frustration: "Bitter Frustration",
  impatience: "Impatience",
  non_toxic: "Non-Toxic",
};

export function displayName(id: string): string {
  const known = CATEGORY_NAMES[id];
  if (known) return known;
  return id
    .split("_")
    .filter((word) => word.length > 0)
    .map((word) => word.charAt(0).toUpperCase() + word.slice(1))
    .join(" ");
}

export type BannerActions = {
  onAccept: () => void;
  onEdit: () => void;
  onDismiss: () => void;
};

const MOUNT_CLASS = "rmod-mount";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Container right under the box; created once, reused for every verdict. */
export function ensureMount(box: HTMLElement): HTMLElement {
  const doc = box.ownerDocument;
  const next = box.nextElementSibling;
  if (next instanceof HTMLElement && next.classList.contains(MOUNT_CLASS)) return next;
  const mount = el(doc, "div", MOUNT_CLASS);
  mount.style.cssText = "font:13px/1.45 system-ui,sans-serif;margin:4px 0;";
  box.insertAdjacentElement("afterend", mount);
  return mount;
}

export function clearMount(mount: HTMLElement): void {
  mount.textContent = "";
}

export function renderOk(mount: HTMLElement): void {
  clearMount(mount);
  const note = el(mount.ownerDocument, "span", "rmod-ok", "✓ tone looks fine");
  note.style.cssText = "color:#3a7a3a;opacity:0.75;";
  mount.appendChild(note);
}

export function renderWarning(mount: HTMLElement, message: string): void {
  clearMount(mount);
  const note = el(mount.ownerDocument, "div", "rmod-warning", message);
  note.style.cssText =
    "color:#7a5b00;background:#fff8e1;border:1px solid #e6c74c;border-radius:4px;padding:4px 8px;";
  mount.appendChild(note);
}

function button(doc: Document, className: string, label: string, onClick: () => void): HTMLButtonElement {
  const btn = el(doc, "button", className, label);
  btn.type = "button";
  btn.style.cssText =
    "margin-right:6px;padding:2px 10px;border:1px solid #999;border-radius:4px;background:#fff;cursor:pointer;";
  btn.addEventListener("click", onClick);
  return btn;
}

export function renderBanner(mount: HTMLElement, doc: ModerationDoc, actions: BannerActions): void {
  const d = mount.ownerDocument;
  clearMount(mount);

  const banner = el(d, "div", "rmod-banner");
  banner.style.cssText =
    "background:#fff3f0;border:1px solid #d98c7f;border-radius:4px;padding:8px 10px;";

  banner.appendChild(el(d, "div", "rmod-headline", "This draft may come across as hostile."));

  // a failed parse means the category list is unreliable, so show the verdict alone
  const assignment = doc.assignment;
  if (assignment && assignment.parse_status !== "failed" && assignment.categories.length > 0) {
    const list = el(d, "ul", "rmod-cats");
    list.style.cssText = "margin:6px 0 0 0;padding-left:18px;";
    for (const id of assignment.categories) {
      const explanation = assignment.explanations[id];
      const label = explanation ? `${displayName(id)}: ${explanation}` : displayName(id);
      list.appendChild(el(d, "li", "rmod-cat", label));
    }
    banner.appendChild(list);
  }

  const rewrite = doc.rewrite;
  if (rewrite && rewrite.rewritten) {
    const suggestion = el(d, "div", "rmod-suggestion");
    suggestion.style.cssText =
      "margin-top:6px;padding:6px 8px;background:#fff;border-left:3px solid #3a7a3a;";
    suggestion.appendChild(el(d, "div", "rmod-suggestion-label", "Suggested rewrite:"));
    suggestion.appendChild(el(d, "div", "rmod-rewrite", rewrite.rewritten));
    banner.appendChild(suggestion);
  }

  const controls = el(d, "div", "rmod-controls");
  controls.style.cssText = "margin-top:6px;";
  if (rewrite && rewrite.rewritten) {
    controls.appendChild(button(d, "rmod-accept", "Accept", actions.onAccept));
    controls.appendChild(button(d, "rmod-edit", "Edit", actions.onEdit));
  }
  controls.appendChild(button(d, "rmod-dismiss", "Dismiss", actions.onDismiss));
  banner.appendChild(controls);

  mount.appendChild(banner);
}
