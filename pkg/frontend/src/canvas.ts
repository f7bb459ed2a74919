// Flow composer: stage palette, SVG node canvas, click-to-wire, live
// validation markers. Submit stays disabled until the service's validate
// endpoint returns an empty report.

import type { ApiClient } from "./api.js";
import {
  addNode,
  connect,
  disconnect,
  emptyDraft,
  removeNode,
  serializeDraft,
  setParam,
  toggleCheckpoint,
  type FlowDraft,
  type Palette,
} from "./draft.js";
import type { Issue } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_W = 150;
const NODE_H = 84;

export class Composer {
  draft: FlowDraft = emptyDraft("my-flow");
  issues: Issue[] = [];
  validated = false;
  private wiringFrom: string | null = null;
  private selected: string | null = null;
  private validateTimer: number | undefined;
  onSubmitted: (flowId: string) => void = () => {};

  constructor(
    private readonly host: HTMLElement,
    private readonly api: ApiClient,
    private readonly palette: Palette,
  ) {
    this.render();
    void this.revalidate();
  }

  // -- actions (also driven directly by tests) ------------------------------

  add(kind: string, id?: string): string {
    const node = addNode(this.draft, this.palette, kind, id);
    this.touch();
    return node.id;
  }

  wire(from: string, to: string, toPort: string): void {
    connect(this.draft, from, to, toPort);
    this.touch();
  }

  unwire(to: string, toPort: string): void {
    disconnect(this.draft, to, toPort);
    this.touch();
  }

  remove(id: string): void {
    removeNode(this.draft, id);
    this.touch();
  }

  checkpoint(id: string): void {
    toggleCheckpoint(this.draft, this.palette, id);
    this.touch();
  }

  param(id: string, key: string, value: string): void {
    const asNumber = Number(value);
    setParam(this.draft, id, key, Number.isFinite(asNumber) && value !== "" ? asNumber : value);
    this.touch();
  }

  rename(name: string): void {
    this.draft.name = name || "untitled";
    this.touch();
  }

  serialize() {
    return serializeDraft(this.draft, this.palette);
  }

  get submittable(): boolean {
    return this.validated && this.issues.length === 0 && this.draft.nodes.length > 0;
  }

  async submit(): Promise<string> {
    const result = await this.api.submitFlow(this.serialize());
    this.onSubmitted(result.flow_id);
    return result.flow_id;
  }

  // -- validation ------------------------------------------------------------

  private touch(): void {
    this.validated = false;
    this.render();
    if (this.validateTimer !== undefined) clearTimeout(this.validateTimer);
    this.validateTimer = setTimeout(() => void this.revalidate(), 180) as unknown as number;
  }

  async revalidate(): Promise<Issue[]> {
    if (this.draft.nodes.length === 0) {
      this.issues = [];
      this.validated = false;
      this.render();
      return [];
    }
    this.issues = await this.api.validateFlow(this.serialize());
    this.validated = true;
    this.render();
    return this.issues;
  }

  private edgeBroken(from: string, to: string, toPort: string): boolean {
    return this.issues.some(
      (i) =>
        i.kind === "ModalityMismatch" &&
        i.message.includes(`${from}.out`) &&
        i.message.includes(`${to}.${toPort}`),
    );
  }

  // -- rendering ---------------------------------------------------------------

  private render(): void {
    this.host.textContent = "";

    const paletteBox = el("div", "palette");
    paletteBox.appendChild(el("h3", "", "stages"));
    for (const info of this.palette.values()) {
      const btn = el("button", "palette-item", info.kind) as HTMLButtonElement;
      const ins = info.inputs.map(([p, m]) => `${p}:${m}`).join(", ");
      btn.title = `${ins || "no inputs"} → ${info.output}`;
      btn.onclick = () => this.add(info.kind);
      paletteBox.appendChild(btn);
    }

    const nameRow = el("div", "name-row");
    const nameInput = el("input") as HTMLInputElement;
    nameInput.value = this.draft.name;
    nameInput.onchange = () => this.rename(nameInput.value);
    nameRow.appendChild(el("label", "", "flow name "));
    nameRow.appendChild(nameInput);

    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "canvas");
    svg.setAttribute("width", "820");
    svg.setAttribute("height", "460");

    for (const edge of this.draft.edges) {
      const a = this.draft.nodes.find((n) => n.id === edge.from);
      const b = this.draft.nodes.find((n) => n.id === edge.to);
      if (!a || !b) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x + NODE_W));
      line.setAttribute("y1", String(a.y + NODE_H / 2));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y + NODE_H / 2));
      const broken = this.edgeBroken(edge.from, edge.to, edge.toPort);
      line.setAttribute("class", broken ? "wire bad" : this.validated ? "wire ok" : "wire");
      line.addEventListener("dblclick", () => this.unwire(edge.to, edge.toPort));
      svg.appendChild(line);
    }

    for (const node of this.draft.nodes) {
      const info = this.palette.get(node.kind);
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("transform", `translate(${node.x},${node.y})`);
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("width", String(NODE_W));
      rect.setAttribute("height", String(NODE_H));
      rect.setAttribute("rx", "8");
      rect.setAttribute(
        "class",
        "node" +
          (this.selected === node.id ? " selected" : "") +
          (this.wiringFrom === node.id ? " wiring" : ""),
      );
      rect.addEventListener("click", () => {
        this.selected = node.id;
        this.render();
      });
      group.appendChild(rect);
      const title = textEl(`${node.id}`, 10, 20, "node-title");
      group.appendChild(title);
      group.appendChild(textEl(node.kind, 10, 38, "node-kind"));
      if (node.checkpoint) group.appendChild(textEl("✎ checkpoint", 10, 56, "node-flag"));

      const outPort = document.createElementNS(SVG_NS, "circle");
      outPort.setAttribute("cx", String(NODE_W));
      outPort.setAttribute("cy", String(NODE_H / 2));
      outPort.setAttribute("r", "7");
      outPort.setAttribute("class", "port out");
      const outTip = document.createElementNS(SVG_NS, "title");
      outTip.textContent = `out: ${info?.output ?? "?"} (click, then click an input port)`;
      outPort.appendChild(outTip);
      outPort.addEventListener("click", () => {
        this.wiringFrom = this.wiringFrom === node.id ? null : node.id;
        this.render();
      });
      group.appendChild(outPort);

      (info?.inputs ?? []).forEach(([port, modality], i) => {
        const cy = (NODE_H * (i + 1)) / ((info?.inputs.length ?? 1) + 1);
        const inPort = document.createElementNS(SVG_NS, "circle");
        inPort.setAttribute("cx", "0");
        inPort.setAttribute("cy", String(cy));
        inPort.setAttribute("r", "7");
        inPort.setAttribute("class", "port in");
        const tip = document.createElementNS(SVG_NS, "title");
        tip.textContent = `${port}: ${modality}`;
        inPort.appendChild(tip);
        inPort.addEventListener("click", () => {
          if (this.wiringFrom && this.wiringFrom !== node.id) {
            this.wire(this.wiringFrom, node.id, port);
            this.wiringFrom = null;
          }
        });
        group.appendChild(inPort);
      });
      svg.appendChild(group);
    }

    const inspector = el("div", "inspector");
    const node = this.draft.nodes.find((n) => n.id === this.selected);
    if (node) {
      inspector.appendChild(el("h3", "", node.id));
      const info = this.palette.get(node.kind);
      if (info?.checkpointable) {
        const cp = el("button", "", node.checkpoint ? "remove checkpoint" : "make checkpoint");
        cp.onclick = () => this.checkpoint(node.id);
        inspector.appendChild(cp);
      }
      const paramRow = el("div", "param-row");
      const keyIn = el("input") as HTMLInputElement;
      keyIn.placeholder = "param (seed, length, ...)";
      const valIn = el("input") as HTMLInputElement;
      valIn.placeholder = "value";
      const setBtn = el("button", "", "set");
      setBtn.onclick = () => keyIn.value && this.param(node.id, keyIn.value, valIn.value);
      paramRow.append(keyIn, valIn, setBtn);
      inspector.appendChild(paramRow);
      inspector.appendChild(
        el("pre", "params", JSON.stringify(node.params, null, 1)),
      );
      const del = el("button", "danger", "delete node");
      del.onclick = () => this.remove(node.id);
      inspector.appendChild(del);
    } else {
      inspector.appendChild(
        el(
          "p",
          "hint",
          "click a stage to add it; click an output port then an input port to wire; " +
            "double-click a wire to remove it",
        ),
      );
    }

    const reportBox = el("div", "report");
    if (!this.validated && this.draft.nodes.length > 0) {
      reportBox.appendChild(el("p", "hint", "validating…"));
    } else if (this.issues.length === 0 && this.draft.nodes.length > 0) {
      reportBox.appendChild(el("p", "ok", "report empty — flow is runnable"));
    }
    for (const issue of this.issues) {
      reportBox.appendChild(el("p", "issue", `${issue.kind}: ${issue.message}`));
    }

    const submit = el("button", "primary", "submit flow") as HTMLButtonElement;
    submit.disabled = !this.submittable;
    submit.onclick = () => void this.submit();

    this.host.append(paletteBox, nameRow, svg, inspector, reportBox, submit);
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function textEl(content: string, x: number, y: number, className: string): SVGTextElement {
  const node = document.createElementNS(SVG_NS, "text") as SVGTextElement;
  node.setAttribute("x", String(x));
  node.setAttribute("y", String(y));
  node.setAttribute("class", className);
  node.textContent = content;
  return node;
}
