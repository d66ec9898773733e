import type {
  CounterMap,
  FeedbackKind,
  FeedbackResult,
  IfiResult,
  IrResponse,
  ScdInfo,
  SentenceInfo,
  VersionsInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/**
 * Typed client for the agent service. Every UI action maps to exactly one
 * method here, and every method to exactly one HTTP request.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = await response.json();
        if (payload && typeof payload.detail === "string") {
          detail = payload.detail;
        }
      } catch {
        // Non-JSON error body; keep the status text.
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  query(text: string, topK = 5, allowZero = false): Promise<IrResponse> {
    return this.request<IrResponse>("POST", "/query", { text, topK, allowZero });
  }

  feedback(kind: FeedbackKind, payload: Record<string, unknown>): Promise<FeedbackResult> {
    return this.request<FeedbackResult>("POST", "/feedback", { kind, payload });
  }

  selectScd(scdId: number): Promise<FeedbackResult> {
    return this.feedback("SelectScd", { scdId });
  }

  selectSentence(windowId: number): Promise<FeedbackResult> {
    return this.feedback("SelectSentence", { windowId });
  }

  reportFaultySentence(windowId: number): Promise<FeedbackResult> {
    return this.feedback("FaultySentence", { windowId });
  }

  reportFaultyAssociation(windowId: number): Promise<FeedbackResult> {
    return this.feedback("FaultyAssociation", { windowId });
  }

  runIfi(thetaRefresh?: number, thetaFresh?: number): Promise<IfiResult> {
    const body: Record<string, number> = {};
    if (thetaRefresh !== undefined) body.thetaRefresh = thetaRefresh;
    if (thetaFresh !== undefined) body.thetaFresh = thetaFresh;
    return this.request<IfiResult>("POST", "/ifi", body);
  }

  versions(): Promise<VersionsInfo> {
    return this.request<VersionsInfo>("GET", "/model/versions");
  }

  restore(version?: number): Promise<FeedbackResult> {
    const body = version === undefined ? {} : { version };
    return this.request<FeedbackResult>("POST", "/model/restore", body);
  }

  counters(): Promise<CounterMap> {
    return this.request<CounterMap>("GET", "/counters");
  }

  scd(scdId: number): Promise<ScdInfo> {
    return this.request<ScdInfo>("GET", `/scd/${scdId}`);
  }

  sentence(windowId: number): Promise<SentenceInfo> {
    return this.request<SentenceInfo>("GET", `/sentence/${windowId}`);
  }
}
