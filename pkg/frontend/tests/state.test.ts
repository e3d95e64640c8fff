/** Store semantics: exact undo/redo, revision tagging, dirty tracking,
 * and edit-action preconditions.
 */

import { describe, expect, it } from "vitest";

import { EditorStore, exportText } from "../src/state";
import type { DesignDocument, ValidationResponse } from "../src/types";

import templateMm from "./fixtures/template-mm.json";
import validateOk from "./fixtures/validate-mm.json";

function freshStore(): EditorStore {
  const store = new EditorStore();
  store.loadDocument(structuredClone(templateMm) as DesignDocument);
  return store;
}

describe("editor store", () => {
  it("undo and redo restore exact prior documents", () => {
    const store = freshStore();
    const original = exportText(store.document!);

    store.setDccMode(0, 0, 0, "BDC");
    const edited = exportText(store.document!);
    expect(edited).not.toBe(original);

    store.setCcExpr(1, 0, "Cascade<4>");
    store.undo();
    expect(exportText(store.document!)).toBe(edited);
    store.undo();
    expect(exportText(store.document!)).toBe(original);

    store.redo();
    expect(exportText(store.document!)).toBe(edited);
    store.redo();
    expect(store.document!.pus[1]!.psts[0]!.cc.expr).toBe("Cascade<4>");
  });

  it("a new edit clears the redo branch", () => {
    const store = freshStore();
    store.setDccMode(0, 0, 0, "BDC");
    store.undo();
    expect(store.canRedo()).toBe(true);
    store.setDacMode(0, 0, 0, "SWH");
    expect(store.canRedo()).toBe(false);
  });

  it("dirty reflects whether the document differs from what was loaded", () => {
    const store = freshStore();
    expect(store.dirty).toBe(false);
    store.setDccMode(0, 0, 0, "BDC");
    expect(store.dirty).toBe(true);
    store.undo();
    expect(store.dirty).toBe(false);
  });

  it("every mutation bumps the revision, including undo", () => {
    const store = freshStore();
    const r0 = store.revision;
    store.setDccMode(0, 0, 0, "BDC");
    expect(store.revision).toBe(r0 + 1);
    store.undo();
    expect(store.revision).toBe(r0 + 2);
  });

  it("edit actions on missing targets throw instead of silently no-op", () => {
    const store = freshStore();
    expect(() => store.setDacMode(99, 0, 0, "DIR")).toThrow(RangeError);
    expect(() => store.setDccMode(0, 9, 0, "DIR")).toThrow(RangeError);
    expect(() => store.setAmcMode(42, "CSB")).toThrow(RangeError);
    expect(() => store.removePu("pu99")).toThrow(RangeError);
    expect(() => store.setPairing("du99", [])).toThrow(RangeError);
  });

  it("addPu clones the last PU under a fresh unpaired name", () => {
    const store = freshStore();
    const name = store.addPu();
    expect(name).toBe("pu6");
    expect(store.document!.pus).toHaveLength(7);
    expect(store.document!.pus[6]!.psts).toHaveLength(1);
    expect(store.document!.pairings["du0"]).not.toContain("pu6");
  });

  it("removePu drops the PU from every pairing list", () => {
    const store = freshStore();
    store.removePu("pu5");
    expect(store.document!.pus.map((pu) => pu.name)).not.toContain("pu5");
    expect(store.document!.pairings["du0"]).toEqual(["pu0", "pu1", "pu2", "pu3", "pu4"]);
  });

  it("validation reports are dropped unless tagged with the live revision", () => {
    const store = freshStore();
    const report = validateOk as ValidationResponse;
    const stale = store.revision;
    store.setDccMode(0, 0, 0, "BDC");
    expect(store.acceptValidation(stale, report)).toBe(false);
    expect(store.currentReport()).toBeNull();
    expect(store.acceptValidation(store.revision, report)).toBe(true);
    expect(store.currentReport()).toBe(report);
    // the accepted report stops corresponding once the document moves on
    store.setDacMode(0, 0, 0, "SWH");
    expect(store.currentReport()).toBeNull();
  });
});
