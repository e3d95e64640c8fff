/** Application bootstrap: toolbar, editor canvas, what-if panel. */

import { ApiClient } from "./api.js";
import { EditorStore, exportText } from "./state.js";
import { ValidationController } from "./validation.js";
import { WhatIfPanel } from "./whatif.js";
import { renderEditor } from "./views/editor.js";
import { renderWhatIf } from "./views/whatifPanel.js";

const TEMPLATES = ["mm", "filter2d", "fft", "mmt"];

function download(name: string, text: string): void {
  const blob = new Blob([text], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = name;
  a.click();
  URL.revokeObjectURL(url);
}

function buildToolbar(store: EditorStore, api: ApiClient, status: HTMLElement): HTMLElement {
  const bar = document.createElement("nav");
  bar.className = "toolbar";

  const templates = document.createElement("select");
  templates.className = "templates";
  templates.append(new Option("load template…", ""));
  for (const name of TEMPLATES) templates.append(new Option(name, name));
  templates.addEventListener("change", () => {
    const app = templates.value;
    templates.value = "";
    if (!app) return;
    api.fetchTemplate(app).then(
      (doc) => store.loadDocument(doc),
      (err) => (status.textContent = String(err)),
    );
  });

  const open = document.createElement("input");
  open.type = "file";
  open.accept = ".json,.ea4rca.json";
  open.addEventListener("change", () => {
    const file = open.files?.[0];
    if (!file) return;
    file.text().then(
      (text) => store.loadDocument(JSON.parse(text)),
      (err) => (status.textContent = String(err)),
    );
  });

  const mkButton = (label: string, onClick: () => void) => {
    const b = document.createElement("button");
    b.type = "button";
    b.textContent = label;
    b.addEventListener("click", onClick);
    return b;
  };

  const exportBtn = mkButton("export", () => {
    if (store.document) download("design.ea4rca.json", exportText(store.document));
  });
  const generateBtn = mkButton("generate", () => {
    const doc = store.document;
    if (!doc) return;
    api.generate(doc).then(
      (res) => {
        for (const [name, text] of Object.entries(res.files)) {
          download(name.split("/").pop() ?? name, text);
        }
        status.textContent = `generated ${Object.keys(res.files).length} file(s), signature ${res.signature.slice(0, 12)}`;
      },
      (err) => (status.textContent = String(err)),
    );
  });
  const undoBtn = mkButton("undo", () => store.undo());
  const redoBtn = mkButton("redo", () => store.redo());

  bar.append(templates, open, undoBtn, redoBtn, exportBtn, generateBtn, status);
  return bar;
}

export function mount(root: HTMLElement, baseUrl = ""): void {
  const api = new ApiClient(baseUrl);
  const store = new EditorStore();
  const panel = new WhatIfPanel(store, api);
  const controller = new ValidationController(store, api);
  controller.attach();

  const status = document.createElement("span");
  status.className = "toolbar-status";
  const editorRoot = document.createElement("div");
  editorRoot.className = "editor-root";
  const panelRoot = document.createElement("div");
  panelRoot.className = "panel-root";

  root.append(buildToolbar(store, api, status), editorRoot, panelRoot);

  const redraw = () => {
    renderEditor(editorRoot, store);
    renderWhatIf(panelRoot, store, panel);
  };
  store.subscribe(redraw);
  panel.subscribe(redraw);
  redraw();
}

const appRoot = typeof document !== "undefined" ? document.getElementById("app") : null;
if (appRoot) mount(appRoot);
