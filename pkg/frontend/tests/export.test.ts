/** Export fidelity: the editor writes .ea4rca.json files byte-identical
 * to what the service's own serializer produces for the same document.
 */

import { describe, expect, it } from "vitest";

import { EditorStore, exportText } from "../src/state";
import type { DesignDocument } from "../src/types";

// raw: the exact bytes the service wrote for the stock mm template
import canonical from "./fixtures/mm.ea4rca.json?raw";

describe("design export", () => {
  it("re-exports a loaded file byte for byte", () => {
    const doc = JSON.parse(canonical) as DesignDocument;
    expect(exportText(doc)).toBe(canonical);
  });

  it("uses two-space indentation and a trailing newline", () => {
    const doc = JSON.parse(canonical) as DesignDocument;
    const text = exportText(doc);
    expect(text.endsWith("}\n")).toBe(true);
    expect(text).toContain('\n  "pus": [\n    {\n      "name"');
  });

  it("round-trips through the store across edits and undo", () => {
    const store = new EditorStore();
    store.loadDocument(JSON.parse(canonical) as DesignDocument);
    expect(exportText(store.document!)).toBe(canonical);

    store.setDccMode(0, 0, 0, "BDC");
    const edited = exportText(store.document!);
    expect(edited).not.toBe(canonical);
    const reparsed = JSON.parse(edited) as DesignDocument;
    expect(reparsed.pus[0]!.psts[0]!.dccs[0]!.mode).toBe("BDC");
    // only that one value moved
    expect(edited.split("\n").length).toBe(canonical.split("\n").length);

    store.undo();
    expect(exportText(store.document!)).toBe(canonical);
  });
});
