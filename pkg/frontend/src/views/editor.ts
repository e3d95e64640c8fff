/** Editor canvas: PU and DU cards with mode controls, resource gauges,
 * and validation findings placed inline at the component they point at.
 *
 * Rendering is a full rebuild from state; the store's revision tagging
 * guarantees the report we draw belongs to the document we draw.
 */

import type { EditorStore } from "../state.js";
import type { Diagnostic, DuData, PuData, ValidationResponse } from "../types.js";

const DAC_MODES = ["DIR", "BDC", "SWH", "DCA"];
const DCC_MODES = ["DIR", "BDC", "SWH", "DCA"];
const AMC_MODES = ["CSB", "JUB", "UNOD"];
const TPC_MODES = ["CUP", "CHL", "THR"];

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

function modeSelect(modes: string[], value: string, onChange: (mode: string) => void): HTMLSelectElement {
  const select = el("select", "mode");
  for (const mode of modes) {
    const option = el("option", undefined, mode);
    option.value = mode;
    select.append(option);
  }
  if (!modes.includes(value)) {
    const option = el("option", undefined, value);
    option.value = value;
    select.append(option);
  }
  select.value = value;
  select.addEventListener("change", () => onChange(select.value));
  return select;
}

function percent(fraction: number): string {
  return `${Math.round(fraction * 100)}%`;
}

function renderHeader(report: ValidationResponse | null, pending: boolean): HTMLElement {
  const header = el("header", "status" + (pending ? " pending" : ""));
  if (report === null) {
    header.append(el("span", "summary", pending ? "validating…" : "no report yet"));
    return header;
  }
  header.append(el("span", "summary", report.summary));
  const gauges = el("span", "gauges");
  const entries: [string, number][] = [
    ["cores", report.resource.aie_core_fraction],
    ["plio-in", report.resource.plio_in_fraction],
    ["plio-out", report.resource.plio_out_fraction],
    ["uram", report.resource.uram_fraction],
  ];
  for (const [name, fraction] of entries) {
    const gauge = el("span", `gauge gauge-${name}`, percent(fraction));
    gauge.title = name;
    if (fraction > 1) gauge.classList.add("over");
    gauges.append(gauge);
  }
  header.append(gauges);
  return header;
}

function renderPu(pu: PuData, index: number, store: EditorStore): HTMLElement {
  const card = el("article", "pu-card");
  const base = `$.pus[${index}]`;
  card.dataset.path = base;
  card.append(el("h3", "name", pu.name));
  pu.psts.forEach((pst, j) => {
    const pstBox = el("div", "pst");
    pstBox.dataset.path = `${base}.psts[${j}]`;
    const dacs = el("div", "dacs");
    pst.dacs.forEach((dac, k) => {
      const chip = el("span", "wrapper dac");
      chip.dataset.path = `${base}.psts[${j}].dacs[${k}]`;
      chip.append(
        modeSelect(DAC_MODES, dac.mode, (m) => store.setDacMode(index, j, k, m)),
        el("code", "serves", dac.serves),
      );
      dacs.append(chip);
    });
    const cc = el("div", "cc");
    cc.dataset.path = `${base}.psts[${j}].cc`;
    const expr = el("input", "cc-expr");
    expr.value = pst.cc.expr;
    expr.addEventListener("change", () => store.setCcExpr(index, j, expr.value));
    cc.append(expr);
    if (pst.cc.kernel !== undefined) cc.append(el("code", "cc-kernel", pst.cc.kernel));
    const dccs = el("div", "dccs");
    pst.dccs.forEach((dcc, k) => {
      const chip = el("span", "wrapper dcc");
      chip.dataset.path = `${base}.psts[${j}].dccs[${k}]`;
      chip.append(
        modeSelect(DCC_MODES, dcc.mode, (m) => store.setDccMode(index, j, k, m)),
        el("code", "serves", dcc.serves),
      );
      dccs.append(chip);
    });
    pstBox.append(dacs, cc, dccs);
    card.append(pstBox);
  });
  const remove = el("button", "remove-pu", "remove");
  remove.type = "button";
  remove.addEventListener("click", () => store.removePu(pu.name));
  card.append(remove);
  return card;
}

function renderDu(du: DuData, index: number, store: EditorStore, pairedPus: string[]): HTMLElement {
  const card = el("article", "du-card");
  const base = `$.dus[${index}]`;
  card.dataset.path = base;
  card.append(el("h3", "name", du.name));
  const amc = el("div", "amc");
  amc.dataset.path = `${base}.amc`;
  amc.append(
    el("label", undefined, "AMC"),
    du.amc === null
      ? el("span", "amc-none", "none")
      : modeSelect(AMC_MODES, du.amc.mode, (m) => store.setAmcMode(index, m)),
  );
  const tpc = el("div", "tpc");
  tpc.dataset.path = `${base}.tpc`;
  tpc.append(
    el("label", undefined, "TPC"),
    modeSelect(TPC_MODES, du.tpc.mode, (m) => store.setTpcMode(index, m)),
  );
  const ssc = el("div", "ssc");
  ssc.dataset.path = `${base}.ssc`;
  ssc.append(
    el("label", undefined, "SSC"),
    el("span", "ssc-modes", `${du.ssc.sender_mode} → ${du.ssc.receiver_mode}`),
  );
  const pairing = el("div", "pairing");
  pairing.dataset.path = `$.pairings.${du.name}`;
  pairing.append(el("label", undefined, "serves"), el("code", undefined, pairedPus.join(", ") || "nothing"));
  card.append(amc, tpc, ssc, pairing);
  return card;
}

/** Attach each finding to the deepest rendered element whose path is a
 * prefix of the finding's path; the rest land in a document-level list. */
function placeDiagnostics(root: HTMLElement, diagnostics: Diagnostic[]): void {
  const anchors: { path: string; node: HTMLElement }[] = [];
  root.querySelectorAll<HTMLElement>("[data-path]").forEach((node) => {
    const path = node.dataset.path;
    if (path) anchors.push({ path, node });
  });
  anchors.sort((a, b) => b.path.length - a.path.length);
  const leftovers = el("ul", "document-diagnostics");
  for (const diag of diagnostics) {
    const hit = anchors.find(
      ({ path }) =>
        diag.path === path ||
        diag.path.startsWith(path + ".") ||
        diag.path.startsWith(path + "["),
    );
    const note = el(hit ? "div" : "li", `inline-diagnostic ${diag.severity}`);
    note.dataset.code = diag.code;
    note.textContent = `${diag.code}: ${diag.message}`;
    if (hit) {
      hit.node.append(note);
      hit.node.classList.add("has-diagnostic");
    } else {
      leftovers.append(note);
    }
  }
  if (leftovers.childElementCount > 0) root.append(leftovers);
}

export function renderEditor(root: HTMLElement, store: EditorStore): void {
  root.textContent = "";
  const doc = store.document;
  if (doc === null) {
    root.append(el("p", "empty", "load a template or open a design file"));
    return;
  }
  const report = store.currentReport();
  root.append(renderHeader(report, report === null && store.validationError === null));
  if (store.validationError !== null) {
    root.append(el("div", "callout error", `validation failed: ${store.validationError}`));
  }

  const pus = el("section", "pus");
  doc.pus.forEach((pu, i) => pus.append(renderPu(pu, i, store)));
  const addPu = el("button", "add-pu", "add PU");
  addPu.type = "button";
  addPu.addEventListener("click", () => store.addPu());
  pus.append(addPu);

  const dus = el("section", "dus");
  doc.dus.forEach((du, i) => dus.append(renderDu(du, i, store, doc.pairings[du.name] ?? [])));

  root.append(pus, dus);
  if (report !== null) placeDiagnostics(root, report.diagnostics);
}
