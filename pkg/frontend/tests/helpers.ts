import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { ApiClient } from "../src/api";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture(name: string): string {
  return readFileSync(join(here, "fixtures", name), "utf-8");
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export interface Route {
  /** substring matched against the URL */
  match: string;
  status?: number;
  body: string;
  contentType?: string;
}

/** ApiClient wired to canned responses; records every request it makes. */
export function mockApi(routes: Route[]): { api: ApiClient; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body as string) : null,
    });
    const route = routes.find((r) => url.includes(r.match));
    if (!route) {
      return new Response(JSON.stringify({ error: `no route for ${url}` }), {
        status: 404,
        headers: { "Content-Type": "application/json" },
      });
    }
    return new Response(route.body, {
      status: route.status ?? 200,
      headers: { "Content-Type": route.contentType ?? "application/json" },
    });
  };
  return { api: new ApiClient("http://service.test", fetchImpl), calls };
}

export const VALID_REPORT = JSON.stringify({ ok: true, violations: [] });
