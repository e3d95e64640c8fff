/** Debounced live validation.
 *
 * Every store change restarts a 300 ms timer; when it fires, the current
 * document goes to POST /v1/validate tagged with the revision it had at
 * send time. The store drops responses whose tag no longer matches, so
 * the displayed report always belongs to the displayed document.
 */

import type { ApiClient } from "./api.js";
import type { EditorStore } from "./state.js";

export class ValidationController {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private detach: (() => void) | null = null;
  private seenRevision = -1;

  constructor(
    private readonly store: EditorStore,
    private readonly api: ApiClient,
    private readonly debounceMs = 300,
  ) {}

  attach(): void {
    this.detach = this.store.subscribe(() => this.schedule());
    if (this.store.document !== null) this.schedule();
  }

  dispose(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.detach?.();
    this.detach = null;
  }

  private schedule(): void {
    // selection changes and report arrivals notify too; only a new
    // document revision warrants another round trip
    if (this.store.revision === this.seenRevision) return;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire();
    }, this.debounceMs);
  }

  private async fire(): Promise<void> {
    const doc = this.store.document;
    if (doc === null) return;
    const revision = this.store.revision;
    this.seenRevision = revision;
    try {
      const report = await this.api.validate(doc);
      this.store.acceptValidation(revision, report);
    } catch (err) {
      this.store.acceptValidationError(revision, String(err));
    }
  }
}
