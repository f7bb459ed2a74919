// Shared wire types mirroring the service's JSON shapes.

export interface ArtifactObj {
  modality: string;
  encoding: "utf8" | "base64";
  data: string;
}

export interface ArtifactView extends ArtifactObj {
  artifact_id: string;
  parent_ids: string[];
  stage_kind: string | null;
}

export interface StageKindInfo {
  kind: string;
  inputs: [string, string][]; // [port, modality]
  output: string;
  checkpointable: boolean;
}

export interface Issue {
  kind: string;
  message: string;
}

export interface NodeDoc {
  id: string;
  kind: string;
  backend: string;
  params: Record<string, string | number | boolean>;
  checkpoint: boolean;
}

export interface FlowDocument {
  name: string;
  nodes: NodeDoc[];
  edges: [string, string, string, string][];
  inputs: [string, string, string][];
  outputs: string[];
}

export interface LogEntry {
  node_id: string;
  started_at: number;
  finished_at: number;
  backend: string;
}

export interface RunView {
  run_id: string;
  flow: string;
  status: "running" | "awaiting_edit" | "completed" | "failed";
  awaiting_node: string | null;
  failure: string | null;
  artifacts: Record<string, ArtifactView>;
  pending: Record<string, ArtifactView>;
  outputs: string[];
  registered: Record<string, string>;
  log: LogEntry[];
}

export interface SearchHit {
  uri: string;
  score: number;
}

export interface RegistryRecord {
  uri: string;
  modality: string;
  digest: string;
  embedding_ref: number;
  description: Record<string, unknown>;
}
