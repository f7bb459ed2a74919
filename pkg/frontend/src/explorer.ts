// Registry explorer: upload an artifact, fuzzy-search for its closest
// registered URIs, and plot the server-computed experiment scatter.

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import { parseReport } from "./csv.js";
import { bytesToBase64 } from "./ppm.js";
import { renderScatter } from "./scatter.js";
import type { ArtifactObj, SearchHit } from "./types.js";

export class Explorer {
  private artifact: ArtifactObj | null = null;
  private artifactName = "";
  private k = 5;
  private hits: SearchHit[] = [];
  private message = "";

  constructor(
    private readonly host: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.render();
  }

  private async loadFile(file: File): Promise<void> {
    const name = file.name.toLowerCase();
    if (name.endsWith(".txt") || name.endsWith(".md")) {
      this.artifact = { modality: "text", encoding: "utf8", data: await file.text() };
    } else if (name.endsWith(".ppm")) {
      const bytes = new Uint8Array(await file.arrayBuffer());
      this.artifact = { modality: "image", encoding: "base64", data: bytesToBase64(bytes) };
    } else if (name.endsWith(".wav")) {
      const bytes = new Uint8Array(await file.arrayBuffer());
      this.artifact = { modality: "audio", encoding: "base64", data: bytesToBase64(bytes) };
    } else {
      this.message = "supported uploads: .txt, .md, .ppm, .wav";
      this.render();
      return;
    }
    this.artifactName = file.name;
    this.message = "";
    this.render();
  }

  private async search(): Promise<void> {
    if (!this.artifact) return;
    try {
      this.hits = await this.api.search(this.artifact, this.k);
      this.message = this.hits.length === 0 ? "no results" : "";
    } catch (err) {
      this.hits = [];
      this.message =
        err instanceof ApiError && err.code === "not_found"
          ? "the registry has no entries of this modality yet"
          : String(err);
    }
    this.render();
  }

  private async showScatter(name: "fig5" | "fig6"): Promise<void> {
    this.message = "computing scatter…";
    this.render();
    const csv = await this.api.experimentCsv(name, 20, 20);
    this.message = "";
    this.render();
    const target = this.host.querySelector(".scatter-box") as HTMLElement | null;
    if (target) renderScatter(target, parseReport(csv));
  }

  private render(): void {
    this.host.textContent = "";
    this.host.appendChild(el("h3", "", "registry explorer"));

    const uploadRow = el("div", "input-row");
    const file = document.createElement("input");
    file.type = "file";
    file.onchange = () => {
      const chosen = file.files?.[0];
      if (chosen) void this.loadFile(chosen);
    };
    uploadRow.appendChild(file);
    if (this.artifactName) {
      uploadRow.appendChild(el("span", "ok", ` ${this.artifactName} (${this.artifact?.modality})`));
    }
    this.host.appendChild(uploadRow);

    const kRow = el("div", "input-row");
    kRow.appendChild(el("label", "", `top-k: ${this.k}`));
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "1";
    slider.max = "20";
    slider.value = String(this.k);
    slider.oninput = () => {
      this.k = Number(slider.value);
      const label = kRow.querySelector("label");
      if (label) label.textContent = `top-k: ${this.k}`;
    };
    slider.onchange = () => void this.search();
    kRow.appendChild(slider);
    const go = el("button", "primary", "search") as HTMLButtonElement;
    go.disabled = this.artifact === null;
    go.onclick = () => void this.search();
    kRow.appendChild(go);
    this.host.appendChild(kRow);

    if (this.message) this.host.appendChild(el("p", "hint", this.message));

    if (this.hits.length > 0) {
      const list = el("ol", "hits");
      for (const hit of this.hits) {
        const item = el("li", "hit");
        const bar = el("span", "score-bar");
        bar.style.width = `${Math.max(0, hit.score) * 120}px`;
        item.appendChild(bar);
        item.appendChild(el("span", "score", hit.score.toFixed(4)));
        item.appendChild(el("code", "uri", hit.uri));
        list.appendChild(item);
      }
      this.host.appendChild(list);
    }

    const scatterRow = el("div", "input-row");
    const fig5 = el("button", "", "image perturbation scatter");
    fig5.onclick = () => void this.showScatter("fig5");
    const fig6 = el("button", "", "text perturbation scatter");
    fig6.onclick = () => void this.showScatter("fig6");
    scatterRow.append(fig5, fig6);
    this.host.appendChild(scatterRow);
    this.host.appendChild(el("div", "scatter-box"));
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}
