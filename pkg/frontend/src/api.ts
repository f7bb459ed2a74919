// Fetch client for the flow/registry service. All decisions (validation,
// typing, retrieval ranking) happen server-side; this layer only moves JSON.

import type {
  ArtifactObj,
  FlowDocument,
  Issue,
  RegistryRecord,
  RunView,
  SearchHit,
  StageKindInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ValidationRejected extends Error {
  constructor(readonly report: Issue[]) {
    super(`flow rejected with ${report.length} issue(s)`);
  }
}

async function readError(resp: Response): Promise<ApiError> {
  let code = "internal";
  let message = resp.statusText;
  try {
    const body = await resp.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, code, message);
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) throw await readError(resp);
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.json("/health");
  }

  stageKinds(): Promise<StageKindInfo[]> {
    return this.json("/stagekinds");
  }

  async validateFlow(doc: FlowDocument): Promise<Issue[]> {
    const body = await this.json<{ report: Issue[] }>("/flows/validate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc),
    });
    return body.report;
  }

  async submitFlow(doc: FlowDocument): Promise<{ flow_id: string; name: string }> {
    const resp = await fetch(this.base + "/flows", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc),
    });
    if (resp.status === 422) {
      const body = await resp.json();
      throw new ValidationRejected(body.report ?? []);
    }
    if (!resp.ok) throw await readError(resp);
    return (await resp.json()) as { flow_id: string; name: string };
  }

  getFlowDoc(flowId: string): Promise<FlowDocument> {
    return this.json(`/flows/${flowId}`);
  }

  listFlows(): Promise<{ flows: { flow_id: string; name: string }[] }> {
    return this.json("/flows");
  }

  startRun(flowId: string, inputs: Record<string, ArtifactObj>): Promise<RunView> {
    return this.json("/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ flow_id: flowId, inputs }),
    });
  }

  getRun(runId: string): Promise<RunView> {
    return this.json(`/runs/${runId}`);
  }

  submitCheckpoint(runId: string, nodeId: string, artifact: ArtifactObj): Promise<RunView> {
    return this.json(`/runs/${runId}/checkpoint`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ node_id: nodeId, artifact }),
    });
  }

  register(artifact: ArtifactObj, note = ""): Promise<RegistryRecord> {
    return this.json("/registry/register", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ artifact, note }),
    });
  }

  async search(artifact: ArtifactObj, k: number): Promise<SearchHit[]> {
    const body = await this.json<{ results: SearchHit[] }>("/registry/search", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ artifact, k }),
    });
    return body.results;
  }

  lookup(uri: string): Promise<RegistryRecord> {
    return this.json(`/registry/record?uri=${encodeURIComponent(uri)}`);
  }

  async experimentCsv(name: "fig5" | "fig6", n: number, m: number, seed = 0): Promise<string> {
    const resp = await fetch(`${this.base}/experiments/${name}?n=${n}&m=${m}&seed=${seed}`);
    if (!resp.ok) throw await readError(resp);
    return await resp.text();
  }
}
