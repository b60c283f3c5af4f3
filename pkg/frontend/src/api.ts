import type {
  AnimalDetail,
  AnimalSummary,
  AppendageKind,
  SkeletonDoc,
  ValidationReport,
} from "./types";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    public status: number,
    public report: ValidationReport | null = null,
  ) {
    super(message);
  }
}

/** Thin client for the /v1 service; the editor owns no mesh/validation logic. */
export class ApiClient {
  constructor(
    private baseUrl: string = "http://127.0.0.1:8420",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let report: ValidationReport | null = null;
      let message = `${init?.method ?? "GET"} ${path} failed (${response.status})`;
      try {
        const body = await response.json();
        if (Array.isArray(body.violations)) {
          report = body as ValidationReport;
          message = `${message}: ${report.violations.join("; ")}`;
        } else if (typeof body.error === "string") {
          message = `${message}: ${body.error}`;
        }
      } catch {
        // non-JSON error body: keep the generic message
      }
      throw new ApiError(message, response.status, report);
    }
    return response;
  }

  private post(path: string, payload: unknown): Promise<Response> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async listAnimals(): Promise<AnimalSummary[]> {
    return (await this.request("/v1/animals")).json();
  }

  async getAnimal(name: string, pose?: string): Promise<AnimalDetail> {
    const query = pose ? `?pose=${encodeURIComponent(pose)}` : "";
    return (await this.request(`/v1/animals/${encodeURIComponent(name)}${query}`)).json();
  }

  async validate(skeleton: SkeletonDoc): Promise<ValidationReport> {
    return (await this.post("/v1/skeleton/validate", { skeleton })).json();
  }

  async appendage(
    skeleton: SkeletonDoc,
    kind: AppendageKind,
    anchor: string,
  ): Promise<SkeletonDoc> {
    return (await this.post("/v1/skeleton/appendage", { skeleton, kind, anchor })).json();
  }

  async mesh(skeleton: SkeletonDoc): Promise<string> {
    return (await this.post("/v1/mesh", { skeleton })).text();
  }
}
