// Run panel: feed external inputs, watch status by polling, and fulfill
// checkpoint edits (textarea for text, accept / regenerate for images).
// The view never assumes an edit landed until the service confirms it.

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import { base64ToBytes, bytesToBase64, decodePpm, drawToCanvas, encodePpm, sampleImage } from "./ppm.js";
import type { ArtifactObj, ArtifactView, FlowDocument, RunView } from "./types.js";

const POLL_MS = 1000;

export class RunPanel {
  private flowId: string | null = null;
  private doc: FlowDocument | null = null;
  private run: RunView | null = null;
  private inputs: Record<string, ArtifactObj> = {};
  private pollTimer: number | undefined;
  private toastText = "";

  constructor(
    private readonly host: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.render();
  }

  async useFlow(flowId: string): Promise<void> {
    this.flowId = flowId;
    this.doc = await this.api.getFlowDoc(flowId);
    this.run = null;
    this.inputs = {};
    this.render();
  }

  private inputKeys(): [string, string, string][] {
    return this.doc?.inputs ?? [];
  }

  private async start(): Promise<void> {
    if (!this.flowId) return;
    this.run = await this.api.startRun(this.flowId, this.inputs);
    this.render();
    this.schedulePoll();
  }

  private schedulePoll(): void {
    if (this.pollTimer !== undefined) clearTimeout(this.pollTimer);
    if (!this.run || this.run.status === "completed" || this.run.status === "failed") return;
    this.pollTimer = setTimeout(() => void this.poll(), POLL_MS) as unknown as number;
  }

  private async poll(): Promise<void> {
    if (!this.run) return;
    this.run = await this.api.getRun(this.run.run_id);
    this.render();
    this.schedulePoll();
  }

  private async submitEdit(nodeId: string, artifact: ArtifactObj): Promise<void> {
    if (!this.run) return;
    try {
      this.run = await this.api.submitCheckpoint(this.run.run_id, nodeId, artifact);
      this.toastText = "";
    } catch (err) {
      if (err instanceof ApiError && err.code === "conflict") {
        this.toastText = `edit conflicted: ${err.message}; refreshing run state`;
        this.run = await this.api.getRun(this.run.run_id);
      } else {
        throw err;
      }
    }
    this.render();
    this.schedulePoll();
  }

  // regenerate = re-run the flow with a new seed on the awaiting stage;
  // the engine recomputes everything, the browser decides nothing
  private async regenerate(nodeId: string): Promise<void> {
    if (!this.doc || !this.run) return;
    const doc: FlowDocument = JSON.parse(JSON.stringify(this.doc));
    const node = doc.nodes.find((n) => n.id === nodeId);
    if (!node) return;
    const seed = Number(node.params["seed"] ?? 0);
    node.params["seed"] = seed + 1;
    doc.name = `${doc.name}`;
    const submitted = await this.api.submitFlow(doc);
    this.flowId = submitted.flow_id;
    this.doc = doc;
    this.run = await this.api.startRun(submitted.flow_id, this.inputs);
    this.toastText = `regenerated ${nodeId} with seed ${seed + 1}`;
    this.render();
    this.schedulePoll();
  }

  // -- rendering -------------------------------------------------------------

  private render(): void {
    this.host.textContent = "";
    if (this.toastText) this.host.appendChild(el("div", "toast", this.toastText));
    if (!this.doc || !this.flowId) {
      this.host.appendChild(el("p", "hint", "submit a flow on the compose tab first"));
      return;
    }
    this.host.appendChild(el("h3", "", `flow ${this.doc.name} (${this.flowId})`));

    if (!this.run) {
      const form = el("div", "inputs-form");
      for (const [node, port, modality] of this.inputKeys()) {
        const key = `${node}.${port}`;
        const row = el("div", "input-row");
        row.appendChild(el("label", "", `${key} (${modality})`));
        if (modality === "text") {
          const area = document.createElement("textarea");
          area.rows = 2;
          area.value = (this.inputs[key]?.data as string) ?? "";
          area.onchange = () => {
            this.inputs[key] = { modality: "text", encoding: "utf8", data: area.value };
          };
          row.appendChild(area);
        } else {
          const file = document.createElement("input");
          file.type = "file";
          file.onchange = async () => {
            const chosen = file.files?.[0];
            if (!chosen) return;
            const bytes = new Uint8Array(await chosen.arrayBuffer());
            this.inputs[key] = {
              modality,
              encoding: "base64",
              data: bytesToBase64(bytes),
            };
            this.render();
          };
          row.appendChild(file);
          if (modality === "image") {
            const sample = el("button", "", "use sample image");
            sample.onclick = () => {
              this.inputs[key] = {
                modality: "image",
                encoding: "base64",
                data: bytesToBase64(encodePpm(sampleImage())),
              };
              this.render();
            };
            row.appendChild(sample);
          }
        }
        row.appendChild(el("span", "ok", key in this.inputs ? " ✓" : ""));
        form.appendChild(row);
      }
      const start = el("button", "primary", "start run") as HTMLButtonElement;
      start.disabled = this.inputKeys().some(([n, p]) => !(`${n}.${p}` in this.inputs));
      start.onclick = () => void this.start();
      form.appendChild(start);
      this.host.appendChild(form);
      return;
    }

    const run = this.run;
    this.host.appendChild(el("p", `status ${run.status}`, `status: ${run.status}`));
    if (run.failure) this.host.appendChild(el("p", "issue", run.failure));

    if (run.status === "awaiting_edit" && run.awaiting_node) {
      this.renderCheckpointEditor(run.awaiting_node, run.pending[run.awaiting_node]);
    }

    if (run.status === "completed") {
      const box = el("div", "outputs");
      box.appendChild(el("h4", "", "outputs"));
      for (const nodeId of run.outputs) {
        const view = run.artifacts[nodeId];
        if (!view) continue;
        const row = el("div", "output-row");
        row.appendChild(el("strong", "", `${nodeId} [${view.modality}]`));
        if (run.registered[nodeId]) {
          row.appendChild(el("code", "uri", run.registered[nodeId]));
        }
        this.renderArtifactPreview(row, view);
        box.appendChild(row);
      }
      this.host.appendChild(box);
    }

    const logBox = el("details", "log");
    const summary = el("summary", "", `stage log (${run.log.length})`);
    logBox.appendChild(summary);
    for (const entry of run.log) {
      const ms = ((entry.finished_at - entry.started_at) * 1000).toFixed(0);
      logBox.appendChild(el("div", "", `${entry.node_id} via ${entry.backend}: ${ms} ms`));
    }
    this.host.appendChild(logBox);
  }

  private renderCheckpointEditor(nodeId: string, pending: ArtifactView | undefined): void {
    const box = el("div", "checkpoint");
    box.appendChild(el("h4", "", `checkpoint: ${nodeId}`));
    if (!pending) {
      box.appendChild(el("p", "issue", "pending artifact missing"));
      this.host.appendChild(box);
      return;
    }
    if (pending.modality === "text") {
      const area = document.createElement("textarea");
      area.rows = 6;
      area.cols = 70;
      area.value = pending.data;
      box.appendChild(area);
      const submit = el("button", "primary", "submit edit");
      submit.onclick = () =>
        void this.submitEdit(nodeId, { modality: "text", encoding: "utf8", data: area.value });
      box.appendChild(submit);
    } else if (pending.modality === "image") {
      const canvas = document.createElement("canvas");
      try {
        drawToCanvas(decodePpm(base64ToBytes(pending.data)), canvas);
      } catch {
        box.appendChild(el("p", "issue", "cannot preview image"));
      }
      box.appendChild(canvas);
      const accept = el("button", "primary", "accept image");
      accept.onclick = () =>
        void this.submitEdit(nodeId, {
          modality: "image",
          encoding: "base64",
          data: pending.data,
        });
      const reseed = el("button", "", "regenerate with new seed");
      reseed.onclick = () => void this.regenerate(nodeId);
      box.append(accept, reseed);
    } else {
      box.appendChild(el("p", "issue", `cannot edit ${pending.modality} checkpoints`));
    }
    this.host.appendChild(box);
  }

  private renderArtifactPreview(row: HTMLElement, view: ArtifactView): void {
    if (view.modality === "text") {
      row.appendChild(el("pre", "preview", view.data.slice(0, 400)));
    } else if (view.modality === "image") {
      const canvas = document.createElement("canvas");
      try {
        drawToCanvas(decodePpm(base64ToBytes(view.data)), canvas);
        row.appendChild(canvas);
      } catch {
        row.appendChild(el("span", "hint", "(preview unavailable)"));
      }
    } else {
      const bytes = base64ToBytes(view.data);
      row.appendChild(el("span", "hint", `${bytes.length.toLocaleString()} bytes`));
    }
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}
