/** Editor state: the document being edited, selection, undo history,
 * and the last validation report tagged with the revision it was
 * computed for.
 *
 * Edits snapshot the whole document as text, so undo/redo restore the
 * exact prior bytes, unknown fields included. Every mutation bumps
 * `revision`; anything displayed next to the document (reports,
 * simulation results) carries the revision it was produced for and is
 * treated as stale once the two disagree.
 */

import type { DesignDocument, ValidationResponse } from "./types.js";

export type Listener = () => void;

export interface TaggedReport {
  revision: number;
  report: ValidationResponse;
}

export function exportText(doc: DesignDocument): string {
  return JSON.stringify(doc, null, 2) + "\n";
}

function snapshot(doc: DesignDocument): string {
  return exportText(doc);
}

export class EditorStore {
  document: DesignDocument | null = null;
  revision = 0;
  selection: string | null = null;
  lastValidation: TaggedReport | null = null;
  validationError: string | null = null;

  private cleanText: string | null = null;
  private undoStack: string[] = [];
  private redoStack: string[] = [];
  private listeners = new Set<Listener>();

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  get dirty(): boolean {
    if (this.document === null || this.cleanText === null) return false;
    return snapshot(this.document) !== this.cleanText;
  }

  loadDocument(doc: DesignDocument): void {
    this.document = doc;
    this.cleanText = snapshot(doc);
    this.undoStack = [];
    this.redoStack = [];
    this.selection = null;
    this.lastValidation = null;
    this.validationError = null;
    this.revision += 1;
    this.notify();
  }

  /** Report arriving from the validation controller; ignored if the
   * document has moved on since the request was sent. */
  acceptValidation(revision: number, report: ValidationResponse): boolean {
    if (revision !== this.revision) return false;
    this.lastValidation = { revision, report };
    this.validationError = null;
    this.notify();
    return true;
  }

  acceptValidationError(revision: number, message: string): boolean {
    if (revision !== this.revision) return false;
    this.validationError = message;
    this.notify();
    return true;
  }

  /** The report for the document as currently displayed, or null while
   * one is pending. */
  currentReport(): ValidationResponse | null {
    if (this.lastValidation && this.lastValidation.revision === this.revision) {
      return this.lastValidation.report;
    }
    return null;
  }

  select(path: string | null): void {
    this.selection = path;
    this.notify();
  }

  // -- document edits -----------------------------------------------------

  private mustDocument(): DesignDocument {
    if (this.document === null) throw new RangeError("no document loaded");
    return this.document;
  }

  private apply(mutate: (doc: DesignDocument) => void): void {
    const doc = this.mustDocument();
    const before = snapshot(doc);
    mutate(doc);
    this.undoStack.push(before);
    this.redoStack = [];
    this.revision += 1;
    this.notify();
  }

  private pu(doc: DesignDocument, index: number) {
    const pu = doc.pus[index];
    if (!pu) throw new RangeError(`no PU at index ${index}`);
    return pu;
  }

  private pst(doc: DesignDocument, puIndex: number, pstIndex: number) {
    const pst = this.pu(doc, puIndex).psts[pstIndex];
    if (!pst) throw new RangeError(`no PST ${pstIndex} in pus[${puIndex}]`);
    return pst;
  }

  setDacMode(puIndex: number, pstIndex: number, dacIndex: number, mode: string): void {
    this.apply((doc) => {
      const dac = this.pst(doc, puIndex, pstIndex).dacs[dacIndex];
      if (!dac) throw new RangeError(`no DAC ${dacIndex}`);
      dac.mode = mode;
    });
  }

  setDccMode(puIndex: number, pstIndex: number, dccIndex: number, mode: string): void {
    this.apply((doc) => {
      const dcc = this.pst(doc, puIndex, pstIndex).dccs[dccIndex];
      if (!dcc) throw new RangeError(`no DCC ${dccIndex}`);
      dcc.mode = mode;
    });
  }

  setCcExpr(puIndex: number, pstIndex: number, expr: string): void {
    this.apply((doc) => {
      this.pst(doc, puIndex, pstIndex).cc.expr = expr;
    });
  }

  assignKernel(puIndex: number, pstIndex: number, kernel: string): void {
    this.apply((doc) => {
      this.pst(doc, puIndex, pstIndex).cc.kernel = kernel;
    });
  }

  setAmcMode(duIndex: number, mode: string): void {
    this.apply((doc) => {
      const du = doc.dus[duIndex];
      if (!du) throw new RangeError(`no DU at index ${duIndex}`);
      if (du.amc === null) {
        du.amc = { mode };
      } else {
        du.amc.mode = mode;
      }
    });
  }

  setTpcMode(duIndex: number, mode: string): void {
    this.apply((doc) => {
      const du = doc.dus[duIndex];
      if (!du) throw new RangeError(`no DU at index ${duIndex}`);
      du.tpc.mode = mode;
    });
  }

  setSscModes(duIndex: number, sender: string, receiver: string): void {
    this.apply((doc) => {
      const du = doc.dus[duIndex];
      if (!du) throw new RangeError(`no DU at index ${duIndex}`);
      du.ssc.sender_mode = sender;
      du.ssc.receiver_mode = receiver;
    });
  }

  setPairing(duName: string, puNames: string[]): void {
    this.apply((doc) => {
      if (!doc.dus.some((du) => du.name === duName)) {
        throw new RangeError(`no DU named ${duName}`);
      }
      doc.pairings[duName] = [...puNames];
    });
  }

  /** Clone the last PU under a fresh name. The copy starts unpaired, so
   * validation will point that out until the user assigns it. */
  addPu(): string {
    let added = "";
    this.apply((doc) => {
      const last = doc.pus[doc.pus.length - 1];
      if (!last) throw new RangeError("document has no PU to clone");
      const names = new Set(doc.pus.map((pu) => pu.name));
      let i = doc.pus.length;
      while (names.has(`pu${i}`)) i += 1;
      const clone = JSON.parse(JSON.stringify(last)) as typeof last;
      clone.name = `pu${i}`;
      doc.pus.push(clone);
      added = clone.name;
    });
    return added;
  }

  removePu(name: string): void {
    this.apply((doc) => {
      const index = doc.pus.findIndex((pu) => pu.name === name);
      if (index < 0) throw new RangeError(`no PU named ${name}`);
      doc.pus.splice(index, 1);
      for (const du of Object.keys(doc.pairings)) {
        const served = doc.pairings[du];
        if (served) doc.pairings[du] = served.filter((n) => n !== name);
      }
    });
  }

  // -- history ------------------------------------------------------------

  canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  undo(): void {
    const doc = this.mustDocument();
    const text = this.undoStack.pop();
    if (text === undefined) return;
    this.redoStack.push(snapshot(doc));
    this.document = JSON.parse(text) as DesignDocument;
    this.revision += 1;
    this.notify();
  }

  redo(): void {
    const doc = this.mustDocument();
    const text = this.redoStack.pop();
    if (text === undefined) return;
    this.undoStack.push(snapshot(doc));
    this.document = JSON.parse(text) as DesignDocument;
    this.revision += 1;
    this.notify();
  }
}
