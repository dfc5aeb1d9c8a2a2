/**
 * Extension settings persisted in extension-local storage.
 * Outside an extension context (unit tests) an in-memory store is used.
 */

export type ExtensionSettings = {
  gatewayUrl: string;
  authToken: string;
  /** Pages the extension is active on. Bare patterns match anywhere in the URL, `*` wildcards allowed. */
  sitePatterns: string[];
  /** CSS selectors that locate comment textareas on a matching page. */
  selectors: string[];
  debounceMs: number;
  autoSuggestRewrite: boolean;
};

export const MIN_DEBOUNCE_MS = 100;
export const DEFAULT_DEBOUNCE_MS = 500;

export const DEFAULT_SETTINGS: ExtensionSettings = {
  gatewayUrl: "http://127.0.0.1:8080",
  authToken: "",
  sitePatterns: ["github.com", "gitlab.", "localhost", "127.0.0.1"],
  selectors: ["textarea"],
  debounceMs: DEFAULT_DEBOUNCE_MS,
  autoSuggestRewrite: true,
};

const STORAGE_KEY = "reviewmod_settings_v1";

export function isWellFormedUrl(value: string): boolean {
  try {
    const url = new URL(value);
    return url.protocol === "http:" || url.protocol === "https:";
  } catch {
    return false;
  }
}

function asStringList(value: unknown, fallback: string[]): string[] {
  if (!Array.isArray(value)) return [...fallback];
  const items = value
    .filter((entry): entry is string => typeof entry === "string")
    .map((entry) => entry.trim())
    .filter((entry) => entry.length > 0);
  return items;
}

/**
 * Coerce whatever storage handed back into a usable settings object.
 * Unknown fields are dropped, missing ones fall back to defaults, and
 * the debounce window never goes below MIN_DEBOUNCE_MS.
 */
export function normalizeSettings(raw: unknown): ExtensionSettings {
  const source = (raw && typeof raw === "object" ? raw : {}) as Record<string, unknown>;
  const gatewayUrl =
    typeof source.gatewayUrl === "string" && source.gatewayUrl.trim()
      ? source.gatewayUrl.trim()
      : DEFAULT_SETTINGS.gatewayUrl;
  const authToken = typeof source.authToken === "string" ? source.authToken : "";
  const debounceRaw = Number(source.debounceMs);
  const debounceMs = Number.isFinite(debounceRaw)
    ? Math.max(MIN_DEBOUNCE_MS, Math.floor(debounceRaw))
    : DEFAULT_DEBOUNCE_MS;
  return {
    gatewayUrl,
    authToken,
    sitePatterns: asStringList(source.sitePatterns, DEFAULT_SETTINGS.sitePatterns),
    selectors: asStringList(source.selectors, DEFAULT_SETTINGS.selectors),
    debounceMs,
    autoSuggestRewrite:
      typeof source.autoSuggestRewrite === "boolean"
        ? source.autoSuggestRewrite
        : DEFAULT_SETTINGS.autoSuggestRewrite,
  };
}

function storageArea(): typeof chrome.storage.local | null {
  if (typeof chrome !== "undefined" && chrome.storage && chrome.storage.local) {
    return chrome.storage.local;
  }
  return null;
}

const memoryStore: Record<string, unknown> = {};

export async function loadSettings(): Promise<ExtensionSettings> {
  const area = storageArea();
  if (!area) return normalizeSettings(memoryStore[STORAGE_KEY]);
  const result = await area.get(STORAGE_KEY);
  return normalizeSettings(result[STORAGE_KEY]);
}

export async function saveSettings(settings: ExtensionSettings): Promise<ExtensionSettings> {
  const normalized = normalizeSettings(settings);
  const area = storageArea();
  if (!area) {
    memoryStore[STORAGE_KEY] = normalized;
    return normalized;
  }
  await area.set({ [STORAGE_KEY]: normalized });
  return normalized;
}
