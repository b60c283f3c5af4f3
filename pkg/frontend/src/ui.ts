import { ApiError } from "./api";

let toastHost: HTMLDivElement | null = null;

export function toast(message: string, kind: "info" | "error" = "info"): void {
  if (!toastHost) {
    toastHost = document.createElement("div");
    toastHost.className = "toasts";
    document.body.appendChild(toastHost);
  }
  const node = document.createElement("div");
  node.className = `toast toast-${kind}`;
  node.textContent = message;
  toastHost.appendChild(node);
  setTimeout(() => node.remove(), 6000);
}

export function toastError(err: unknown): void {
  if (err instanceof ApiError && err.report) {
    toast(`validation failed: ${err.report.violations.join("; ")}`, "error");
  } else {
    toast(err instanceof Error ? err.message : String(err), "error");
  }
}

export function download(filename: string, content: string, mime: string): void {
  const blob = new Blob([content], { type: mime });
  const url = URL.createObjectURL(blob);
  const link = document.createElement("a");
  link.href = url;
  link.download = filename;
  link.click();
  URL.revokeObjectURL(url);
}

export function button(label: string, onClick: () => void): HTMLButtonElement {
  const node = document.createElement("button");
  node.textContent = label;
  node.addEventListener("click", onClick);
  return node;
}

export function row(...children: (HTMLElement | string)[]): HTMLDivElement {
  const node = document.createElement("div");
  node.className = "row";
  for (const child of children) {
    node.append(typeof child === "string" ? document.createTextNode(child) : child);
  }
  return node;
}
