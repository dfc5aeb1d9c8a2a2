// Options page logic.

import {
  isWellFormedUrl,
  loadSettings,
  MIN_DEBOUNCE_MS,
  saveSettings,
} from "./settings";

function input(id: string): HTMLInputElement {
  return document.getElementById(id) as HTMLInputElement;
}

function textarea(id: string): HTMLTextAreaElement {
  return document.getElementById(id) as HTMLTextAreaElement;
}

function setStatus(message: string, isError = false): void {
  const status = document.getElementById("status");
  if (!status) return;
  status.textContent = message;
  status.style.color = isError ? "#a33" : "#3a7a3a";
  if (message && !isError) {
    setTimeout(() => {
      status.textContent = "";
    }, 1500);
  }
}

function lines(value: string): string[] {
  return value
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}

async function restoreOptions(): Promise<void> {
  const settings = await loadSettings();
  input("gatewayUrl").value = settings.gatewayUrl;
  input("authToken").value = settings.authToken;
  textarea("sitePatterns").value = settings.sitePatterns.join("\n");
  textarea("selectors").value = settings.selectors.join("\n");
  input("debounceMs").value = String(settings.debounceMs);
  input("autoSuggestRewrite").checked = settings.autoSuggestRewrite;
}

async function saveOptions(): Promise<void> {
  const gatewayUrl = input("gatewayUrl").value.trim();
  if (!isWellFormedUrl(gatewayUrl)) {
    setStatus("Gateway URL must be a well-formed http(s) URL.", true);
    return;
  }
  const debounceMs = Number(input("debounceMs").value);
  if (!Number.isFinite(debounceMs) || debounceMs < MIN_DEBOUNCE_MS) {
    setStatus(`Debounce must be at least ${MIN_DEBOUNCE_MS} ms.`, true);
    return;
  }
  await saveSettings({
    gatewayUrl,
    authToken: input("authToken").value,
    sitePatterns: lines(textarea("sitePatterns").value),
    selectors: lines(textarea("selectors").value),
    debounceMs,
    autoSuggestRewrite: input("autoSuggestRewrite").checked,
  });
  setStatus("Saved.");
}

document.addEventListener("DOMContentLoaded", () => void restoreOptions());
document.getElementById("saveButton")?.addEventListener("click", () => void saveOptions());
