// App shell: three tabs over one ApiClient. Served at /ui by the service,
// so API calls go to the same origin.

import { ApiClient } from "./api.js";
import { Composer } from "./canvas.js";
import { makePalette } from "./draft.js";
import { Explorer } from "./explorer.js";
import { RunPanel } from "./runview.js";

async function boot(): Promise<void> {
  const root = document.querySelector<HTMLDivElement>("#app");
  if (!root) throw new Error("missing #app element");
  const api = new ApiClient("");

  let kinds;
  try {
    kinds = await api.stageKinds();
  } catch (err) {
    root.textContent = `cannot reach the service: ${err}`;
    return;
  }

  const tabs = document.createElement("nav");
  tabs.className = "tabs";
  const panels: Record<string, HTMLElement> = {};
  for (const name of ["compose", "runs", "registry"]) {
    const btn = document.createElement("button");
    btn.textContent = name;
    btn.onclick = () => {
      for (const [key, panel] of Object.entries(panels)) {
        panel.style.display = key === name ? "block" : "none";
      }
      tabs.querySelectorAll("button").forEach((b) => b.classList.remove("active"));
      btn.classList.add("active");
    };
    tabs.appendChild(btn);
    const panel = document.createElement("section");
    panel.className = `panel panel-${name}`;
    panel.style.display = name === "compose" ? "block" : "none";
    panels[name] = panel;
  }
  root.appendChild(tabs);
  for (const panel of Object.values(panels)) root.appendChild(panel);
  (tabs.firstChild as HTMLButtonElement).classList.add("active");

  const composer = new Composer(panels["compose"], api, makePalette(kinds));
  const runPanel = new RunPanel(panels["runs"], api);
  new Explorer(panels["registry"], api);

  composer.onSubmitted = (flowId) => {
    void runPanel.useFlow(flowId);
    panels["compose"].style.display = "none";
    panels["runs"].style.display = "block";
    tabs.querySelectorAll("button").forEach((b, i) => {
      b.classList.toggle("active", i === 1);
    });
  };
}

void boot();
