/**
 * Wire types and HTTP client for the archmend service.
 *
 * Every type here mirrors a JSON payload verbatim. The client does
 * transport only: no payload field is computed, renamed, or dropped on
 * the way through, so anything the UI shows can be traced back to a
 * response body.
 */

export interface ActionDoc {
  verb: string;
  args: Record<string, string>;
}

export interface NodeDoc {
  node_id: number;
  parent: number | null;
  action: ActionDoc | null;
  state_hash: string;
  violation_count: number;
  score: number;
}

export interface TreeDoc {
  session_id: string;
  system_id: string;
  cursor: number;
  outcome: string;
  already_consolidated: boolean;
  selected_cause: string | null;
  nodes: NodeDoc[];
}

export interface ViolationDoc {
  id: string;
  kind: string;
  module_pair: [string, string];
  rule_id: string | null;
  subjects: string[];
  explanation: string;
}

export interface ViolationReport {
  node_id: number;
  conformant: boolean;
  counts: Record<string, number>;
  violations: ViolationDoc[];
}

export interface CauseDoc {
  id: number;
  cause_kind: string;
  class_key: string;
  confidence: number;
  covered: string[];
  explanation: string;
  parameters: Record<string, string>;
  signature: string;
}

export interface CauseList {
  node_id: number;
  candidates: CauseDoc[];
}

export interface PlanDoc {
  actions: ActionDoc[];
  step_scores: number[];
  final_score: number;
  final_violations: number;
  consolidating: boolean;
  provenance: string;
}

export interface PlanList {
  node_id: number;
  strategy: string;
  scope: string;
  plans: PlanDoc[];
}

export interface SessionCreated {
  session_id: string;
  root: NodeDoc;
}

export interface SelectedCause {
  selected_cause: { signature: string; class_key: string };
}

export interface StepResult {
  node: NodeDoc;
  cursor: number;
}

export interface CursorResult {
  cursor: number;
}

export interface EventDoc {
  timestamp: number;
  system_id: string;
  kind: string;
  class_key: string;
  verb_sequence: string[] | null;
  outcome: string | null;
}

export interface FinishResult {
  outcome: string;
  events: EventDoc[];
}

export interface KbCauseRow {
  class_key: string;
  system_id: string;
  offered: number;
  confirmed: number;
  system_score: number;
  blended: number;
}

export interface KbPlanRow {
  class_key: string;
  system_id: string;
  verbs: string[];
  attempts: number;
  successes: number;
  system_score: number;
  blended: number;
}

export interface KbStats {
  event_count: number;
  causes: KbCauseRow[];
  plans: KbPlanRow[];
  priors: Record<string, number>;
}

export interface PlanQuery {
  strategy?: string;
  width?: number;
  depth?: number;
}

/** Error bodies are {error, detail}; both land here along with the status. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly error: string,
    readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    // bind: the global fetch throws if called with a detached this
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  createSession(
    architecture: unknown,
    implementation: unknown,
    systemId: string,
  ): Promise<SessionCreated> {
    return this.request("POST", "/sessions", {
      architecture,
      implementation,
      system_id: systemId,
    });
  }

  tree(sessionId: string): Promise<TreeDoc> {
    return this.request("GET", `/sessions/${sessionId}/tree`);
  }

  violations(sessionId: string, nodeId: number): Promise<ViolationReport> {
    return this.request("GET", `/sessions/${sessionId}/nodes/${nodeId}/violations`);
  }

  causes(sessionId: string, nodeId: number): Promise<CauseList> {
    return this.request("GET", `/sessions/${sessionId}/nodes/${nodeId}/causes`);
  }

  selectCause(sessionId: string, candidateId: number): Promise<SelectedCause> {
    return this.request("POST", `/sessions/${sessionId}/cause`, {
      candidate_id: candidateId,
    });
  }

  plans(sessionId: string, nodeId: number, query: PlanQuery = {}): Promise<PlanList> {
    const params = new URLSearchParams();
    if (query.strategy !== undefined) params.set("strategy", query.strategy);
    if (query.width !== undefined) params.set("width", String(query.width));
    if (query.depth !== undefined) params.set("depth", String(query.depth));
    const qs = params.toString();
    const suffix = qs ? `?${qs}` : "";
    return this.request("GET", `/sessions/${sessionId}/nodes/${nodeId}/plans${suffix}`);
  }

  applyStep(sessionId: string, action: ActionDoc): Promise<StepResult> {
    return this.request("POST", `/sessions/${sessionId}/steps`, { action });
  }

  moveCursor(sessionId: string, nodeId: number): Promise<CursorResult> {
    return this.request("POST", `/sessions/${sessionId}/cursor`, { node_id: nodeId });
  }

  finish(sessionId: string, outcome: string): Promise<FinishResult> {
    return this.request("POST", `/sessions/${sessionId}/finish`, { outcome });
  }

  kbStats(): Promise<KbStats> {
    return this.request("GET", "/kb/stats");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(this.base + path, init);
    if (!resp.ok) {
      let error = "http_error";
      let detail = `${resp.status} ${resp.statusText}`;
      try {
        const doc = await resp.json();
        if (doc && typeof doc.error === "string") error = doc.error;
        if (doc && typeof doc.detail === "string") detail = doc.detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(resp.status, error, detail);
    }
    return (await resp.json()) as T;
  }
}
