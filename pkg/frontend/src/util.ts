/** FNV-1a 32-bit hash as 8 hex chars. Session-local dedupe key for drafts. */
export function hashDraft(text: string): string {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return (h >>> 0).toString(16).padStart(8, "0");
}

function wildcardSource(pattern: string): string {
  // escape regex metacharacters, then widen * into .*
  return pattern.replace(/[.+?^${}()|[\]\\]/g, "\\$&").replace(/\*/g, ".*");
}

/**
 * True when the page URL matches one of the enabled-site patterns.
 * A bare pattern like "github.com" matches anywhere in the URL; a
 * pattern carrying a scheme ("https://review.internal/*") is anchored
 * to the start. Matching is case-insensitive. No patterns, no match.
 */
export function pageEnabled(url: string, patterns: string[]): boolean {
  return patterns.some((raw) => {
    const pattern = raw.trim();
    if (!pattern) return false;
    const source = wildcardSource(pattern);
    const re = pattern.includes("://") ? new RegExp("^" + source, "i") : new RegExp(source, "i");
    return re.test(url);
  });
}
