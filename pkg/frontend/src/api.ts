/** Thin fetch client for the /v1 service. All numbers the editor shows
 * come back through here; nothing is computed locally.
 */

import type {
  DesignDocument,
  GenerateResponse,
  KernelListing,
  ProblemPayload,
  SimulateRequest,
  SimResponse,
  ValidationResponse,
} from "./types.js";

/** A non-2xx response, carrying the service's problem payload. */
export class ApiProblem extends Error {
  constructor(
    readonly status: number,
    readonly payload: ProblemPayload,
  ) {
    super(`${payload.code}: ${payload.message}`);
    this.name = "ApiProblem";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init);
  const body = (await res.json()) as unknown;
  if (!res.ok) {
    throw new ApiProblem(res.status, body as ProblemPayload);
  }
  return body as T;
}

function postJson<T>(url: string, payload: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  fetchTemplate(app: string, pus?: number): Promise<DesignDocument> {
    const query = pus != null ? `?pus=${pus}` : "";
    return request(`${this.base}/v1/templates/${app}${query}`);
  }

  fetchKernels(): Promise<KernelListing> {
    return request(`${this.base}/v1/kernels`);
  }

  validate(design: DesignDocument): Promise<ValidationResponse> {
    return postJson(`${this.base}/v1/validate`, design);
  }

  generate(design: DesignDocument): Promise<GenerateResponse> {
    return postJson(`${this.base}/v1/generate`, design);
  }

  simulate(body: SimulateRequest): Promise<SimResponse> {
    return postJson(`${this.base}/v1/simulate`, body);
  }
}
