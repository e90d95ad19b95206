/** Thin typed client for the orgrisk service; all reasoning stays server-side. */

import type {
  DiffResponse,
  InferResponse,
  InterventionRecord,
  ProofTreeDoc,
  ScenarioDocument,
  SessionResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: unknown,
    message?: string,
  ) {
    super(message ?? `request failed with status ${status}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function request<T>(
  fetchFn: FetchLike,
  url: string,
  init?: RequestInit,
): Promise<T> {
  const response = await fetchFn(url, init);
  const text = await response.text();
  let payload: unknown = null;
  if (text) {
    try {
      payload = JSON.parse(text);
    } catch {
      payload = text;
    }
  }
  if (!response.ok) {
    throw new ApiError(response.status, payload);
  }
  return payload as T;
}

export interface ApiClient {
  uploadScenario(doc: ScenarioDocument): Promise<SessionResponse>;
  runInference(sessionId: string): Promise<InferResponse>;
  explainFact(sessionId: string, factId: string): Promise<ProofTreeDoc>;
  runWhatIf(
    sessionId: string,
    branch: string,
    interventions: InterventionRecord[],
  ): Promise<DiffResponse>;
}

export function createClient(
  baseUrl: string,
  fetchFn: FetchLike = (input, init) => fetch(input, init),
): ApiClient {
  const base = baseUrl.replace(/\/$/, "");
  const post = (path: string, body: unknown) => ({
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  return {
    uploadScenario: (doc) =>
      request<SessionResponse>(fetchFn, `${base}/scenarios`, post("", doc)),
    runInference: (sessionId) =>
      request<InferResponse>(
        fetchFn,
        `${base}/scenarios/${sessionId}/infer`,
        { method: "POST" },
      ),
    explainFact: (sessionId, factId) =>
      request<ProofTreeDoc>(
        fetchFn,
        `${base}/scenarios/${sessionId}/explain/${factId}`,
      ),
    runWhatIf: (sessionId, branch, interventions) =>
      request<DiffResponse>(
        fetchFn,
        `${base}/scenarios/${sessionId}/whatif`,
        post("", { branch, interventions }),
      ),
  };
}
