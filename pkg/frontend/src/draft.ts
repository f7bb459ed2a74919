// Flow draft: the canvas-side mirror of a flow document plus node positions.
// Serialization derives external inputs (unwired ports, typed from the stage
// palette) and outputs (sink nodes), so a green canvas submits a document the
// service accepts; the service's validate endpoint stays the only judge.

import type { FlowDocument, StageKindInfo } from "./types.js";

export interface DraftNode {
  id: string;
  kind: string;
  backend: string;
  params: Record<string, string | number | boolean>;
  checkpoint: boolean;
  x: number;
  y: number;
}

export interface DraftEdge {
  from: string;
  fromPort: string;
  to: string;
  toPort: string;
}

export interface FlowDraft {
  name: string;
  nodes: DraftNode[];
  edges: DraftEdge[];
}

export type Palette = Map<string, StageKindInfo>;

export function makePalette(kinds: StageKindInfo[]): Palette {
  return new Map(kinds.map((k) => [k.kind, k]));
}

export function emptyDraft(name = "untitled"): FlowDraft {
  return { name, nodes: [], edges: [] };
}

export function addNode(
  draft: FlowDraft,
  palette: Palette,
  kind: string,
  id?: string,
  pos?: { x: number; y: number },
): DraftNode {
  const info = palette.get(kind);
  if (!info) throw new Error(`unknown stage kind ${kind}`);
  let nodeId = id ?? nextId(draft, kind);
  if (draft.nodes.some((n) => n.id === nodeId)) {
    throw new Error(`duplicate node id ${nodeId}`);
  }
  const index = draft.nodes.length;
  const node: DraftNode = {
    id: nodeId,
    kind,
    backend: "mock",
    params: {},
    checkpoint: false,
    x: pos?.x ?? 40 + (index % 4) * 190,
    y: pos?.y ?? 40 + Math.floor(index / 4) * 130,
  };
  draft.nodes.push(node);
  return node;
}

function nextId(draft: FlowDraft, kind: string): string {
  const stem = kind.toLowerCase();
  for (let i = 1; ; i++) {
    const candidate = `${stem}${i}`;
    if (!draft.nodes.some((n) => n.id === candidate)) return candidate;
  }
}

export function removeNode(draft: FlowDraft, id: string): void {
  draft.nodes = draft.nodes.filter((n) => n.id !== id);
  draft.edges = draft.edges.filter((e) => e.from !== id && e.to !== id);
}

export function connect(draft: FlowDraft, from: string, to: string, toPort: string): DraftEdge {
  if (!draft.nodes.some((n) => n.id === from)) throw new Error(`no node ${from}`);
  if (!draft.nodes.some((n) => n.id === to)) throw new Error(`no node ${to}`);
  // one feed per port: rewiring replaces the previous connection
  draft.edges = draft.edges.filter((e) => !(e.to === to && e.toPort === toPort));
  const edge: DraftEdge = { from, fromPort: "out", to, toPort };
  draft.edges.push(edge);
  return edge;
}

export function disconnect(draft: FlowDraft, to: string, toPort: string): void {
  draft.edges = draft.edges.filter((e) => !(e.to === to && e.toPort === toPort));
}

export function toggleCheckpoint(draft: FlowDraft, palette: Palette, id: string): boolean {
  const node = draft.nodes.find((n) => n.id === id);
  if (!node) throw new Error(`no node ${id}`);
  const info = palette.get(node.kind);
  if (!info?.checkpointable) return node.checkpoint; // only editable modalities pause
  node.checkpoint = !node.checkpoint;
  return node.checkpoint;
}

export function setParam(
  draft: FlowDraft,
  id: string,
  key: string,
  value: string | number | boolean,
): void {
  const node = draft.nodes.find((n) => n.id === id);
  if (!node) throw new Error(`no node ${id}`);
  node.params[key] = value;
}

export function externalInputs(draft: FlowDraft, palette: Palette): [string, string, string][] {
  const fed = new Set(draft.edges.map((e) => `${e.to}.${e.toPort}`));
  const inputs: [string, string, string][] = [];
  for (const node of draft.nodes) {
    const info = palette.get(node.kind);
    if (!info) continue;
    for (const [port, modality] of info.inputs) {
      if (!fed.has(`${node.id}.${port}`)) inputs.push([node.id, port, modality]);
    }
  }
  return inputs;
}

export function sinkNodes(draft: FlowDraft): string[] {
  const sources = new Set(draft.edges.map((e) => e.from));
  return draft.nodes.filter((n) => !sources.has(n.id)).map((n) => n.id);
}

export function serializeDraft(draft: FlowDraft, palette: Palette): FlowDocument {
  return {
    name: draft.name,
    nodes: draft.nodes.map((n) => ({
      id: n.id,
      kind: n.kind,
      backend: n.backend,
      params: { ...n.params },
      checkpoint: n.checkpoint,
    })),
    edges: draft.edges.map((e) => [e.from, e.fromPort, e.to, e.toPort]),
    inputs: externalInputs(draft, palette),
    outputs: sinkNodes(draft),
  };
}

export function draftFromDocument(doc: FlowDocument): FlowDraft {
  const draft = emptyDraft(doc.name);
  doc.nodes.forEach((n, i) => {
    draft.nodes.push({
      id: n.id,
      kind: n.kind,
      backend: n.backend ?? "mock",
      params: { ...(n.params ?? {}) },
      checkpoint: n.checkpoint ?? false,
      x: 40 + (i % 4) * 190,
      y: 40 + Math.floor(i / 4) * 130,
    });
  });
  for (const [from, fromPort, to, toPort] of doc.edges) {
    draft.edges.push({ from, fromPort, to, toPort });
  }
  return draft;
}
