/** What-if panel view: run controls, metric readouts, phase bars, a
 * trace timeline, and the previous run for comparison. Greys any result
 * whose revision no longer matches the document.
 */

import type { EditorStore } from "../state.js";
import type { WhatIfPanel, WhatIfRequest, WhatIfRun } from "../whatif.js";
import type { SimResponse, TraceRow } from "../types.js";

const APPS = ["mm", "filter2d", "fft", "mmt"];
const TIMELINE_ROWS = 48;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function metric(name: string, value: string): HTMLElement {
  const box = el("div", `metric metric-${name}`);
  box.append(el("span", "metric-name", name), el("span", "metric-value", value));
  return box;
}

function formatRate(perSec: number): string {
  return perSec.toPrecision(4);
}

function formatGops(opsPerSec: number | null): string {
  return opsPerSec === null ? "n/a" : (opsPerSec / 1e9).toFixed(2);
}

function renderPhases(result: SimResponse): HTMLElement {
  const bars = el("div", "phase-bars");
  for (const [name, seconds] of Object.entries(result.phases)) {
    const bar = el("div", "phase-bar");
    bar.dataset.phase = name;
    const share = result.total_time_s > 0 ? seconds / result.total_time_s : 0;
    bar.style.width = `${Math.min(100, share * 100).toFixed(1)}%`;
    bar.title = `${name}: ${(seconds * 1e6).toFixed(2)} us`;
    bar.append(el("span", "phase-name", name));
    bars.append(bar);
  }
  return bars;
}

function renderTimeline(result: SimResponse): HTMLElement {
  const box = el("div", "timeline");
  const totalPs = result.total_time_s * 1e12;
  const rows: TraceRow[] = result.trace.slice(0, TIMELINE_ROWS);
  for (const [start, duration, resource, phase, pair] of rows) {
    const row = el("div", "trace-row");
    row.dataset.resource = resource;
    row.dataset.phase = phase;
    row.dataset.pair = pair;
    if (totalPs > 0) {
      row.style.marginLeft = `${((start / totalPs) * 100).toFixed(2)}%`;
      row.style.width = `${Math.max(0.2, (duration / totalPs) * 100).toFixed(2)}%`;
    }
    row.title = `${pair} ${resource}/${phase}`;
    box.append(row);
  }
  if (result.trace.length > rows.length) {
    box.append(el("div", "timeline-more", `… ${result.trace.length - rows.length} more events`));
  }
  return box;
}

function describeRequest(request: WhatIfRequest): string {
  const override = request.pusOverride != null ? ` @ ${request.pusOverride} PU` : "";
  return `${request.app} ${request.size}${override}`;
}

function renderRun(run: WhatIfRun, role: "current" | "previous", stale: boolean): HTMLElement {
  const box = el("div", `result ${role}` + (stale ? " stale" : ""));
  box.dataset.revision = String(run.revision);
  box.append(el("h4", "result-title", describeRequest(run.request)));
  if (stale) box.append(el("span", "stale-note", "edited since this run"));
  const r = run.result;
  const metrics = el("div", "metrics");
  metrics.append(
    metric("time", `${(r.total_time_s * 1e3).toFixed(3)} ms`),
    metric("tasks-per-sec", formatRate(r.tasks_per_sec)),
    metric("gops", formatGops(r.ops_per_sec)),
    metric("tasks-done", String(r.tasks_done)),
  );
  box.append(metrics, renderPhases(r));
  if (role === "current" && r.trace.length > 0) box.append(renderTimeline(r));
  return box;
}

function readRequest(form: HTMLFormElement): WhatIfRequest {
  const app = (form.querySelector<HTMLSelectElement>("select.app") as HTMLSelectElement).value;
  const size = (form.querySelector<HTMLInputElement>("input.size") as HTMLInputElement).value;
  const pusRaw = (form.querySelector<HTMLInputElement>("input.pus") as HTMLInputElement).value;
  const request: WhatIfRequest = { app, size };
  if (pusRaw.trim() !== "") request.pusOverride = Number(pusRaw);
  return request;
}

function renderControls(store: EditorStore, panel: WhatIfPanel, deployable: boolean): HTMLFormElement {
  const form = el("form", "controls");
  form.addEventListener("submit", (ev) => ev.preventDefault());
  const app = el("select", "app");
  for (const name of APPS) {
    const option = el("option", undefined, name);
    option.value = name;
    app.append(option);
  }
  const workload = store.document?.workload as { app?: string } | null | undefined;
  if (workload?.app && APPS.includes(workload.app)) app.value = workload.app;
  const size = el("input", "size");
  size.placeholder = "size, e.g. 768x768x768";
  size.value = "768x768x768";
  const pus = el("input", "pus");
  pus.placeholder = "PU override";
  const run = el("button", "run", "run simulation");
  run.type = "button";
  run.disabled = !deployable || panel.inFlight;
  run.addEventListener("click", () => void panel.run(readRequest(form)));
  form.append(app, size, pus, run);
  return form;
}

export function renderWhatIf(root: HTMLElement, store: EditorStore, panel: WhatIfPanel): void {
  root.textContent = "";
  const section = el("section", "what-if");
  const report = store.currentReport();
  const deployable = report?.deployable === true;

  section.append(renderControls(store, panel, deployable));
  if (report === null) {
    section.classList.add("disabled");
    section.append(el("p", "disabled-reason", "waiting for validation"));
  } else if (!report.deployable) {
    section.classList.add("disabled");
    const first = report.diagnostics.find((d) => d.severity === "error");
    section.append(
      el("p", "disabled-reason", `design is not deployable${first ? `: ${first.code}` : ""}`),
    );
  }
  if (panel.inFlight) section.append(el("p", "running", "simulating…"));

  if (panel.problem !== null) {
    const callout = el("div", "callout infeasible");
    callout.append(el("strong", undefined, panel.problem.payload.code));
    callout.append(el("p", undefined, panel.problem.payload.message));
    for (const diag of panel.problem.payload.diagnostics ?? []) {
      const line = el("p", "problem-diagnostic", `${diag.code}: ${diag.message}`);
      line.dataset.code = diag.code;
      callout.append(line);
    }
    section.append(callout);
  }
  if (panel.errorMessage !== null) {
    section.append(el("div", "callout error", panel.errorMessage));
  }

  if (panel.current !== null) {
    section.append(renderRun(panel.current, "current", panel.isStale(panel.current)));
    if (panel.previous !== null) {
      section.append(renderRun(panel.previous, "previous", panel.isStale(panel.previous)));
      const ratio = panel.current.result.tasks_per_sec / panel.previous.result.tasks_per_sec;
      const comparison = el("div", "comparison");
      comparison.dataset.ratio = ratio.toFixed(2);
      comparison.textContent = `${ratio.toFixed(2)}× the previous run's throughput`;
      if (ratio > 0.95 && ratio < 1.05) {
        comparison.append(
          el("span", "hint saturation", " — unchanged within 5%; extra PUs sit idle at this size"),
        );
      }
      section.append(comparison);
    }
  }

  root.append(section);
}
