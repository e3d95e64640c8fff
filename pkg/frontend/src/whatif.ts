/** What-if panel: explicit simulation runs against the service.
 *
 * One click, one POST /v1/simulate. A run is tagged with the document
 * revision it was started from; if the document changes before the
 * response lands, the response is discarded. Results that are already
 * displayed survive later edits but render greyed until re-run. The
 * previous run is kept so two settings can be compared side by side.
 */

import { ApiClient, ApiProblem } from "./api.js";
import type { EditorStore } from "./state.js";
import type { ProblemPayload, SimResponse } from "./types.js";

export interface WhatIfRequest {
  app: string;
  size: string;
  /** Simulate the stock template at this PU count instead of the
   * edited document (the service does the rescaling). */
  pusOverride?: number;
}

export interface WhatIfRun {
  revision: number;
  request: WhatIfRequest;
  result: SimResponse;
}

export interface WhatIfProblem {
  revision: number;
  request: WhatIfRequest;
  payload: ProblemPayload;
}

export type RunOutcome = "done" | "infeasible" | "busy" | "superseded" | "failed";

export class WhatIfPanel {
  current: WhatIfRun | null = null;
  previous: WhatIfRun | null = null;
  problem: WhatIfProblem | null = null;
  errorMessage: string | null = null;
  inFlight = false;

  private listeners = new Set<() => void>();

  constructor(
    private readonly store: EditorStore,
    private readonly api: ApiClient,
  ) {}

  subscribe(fn: () => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  /** A displayed result is stale once the document has moved past the
   * revision it was computed for. */
  isStale(run: WhatIfRun): boolean {
    return run.revision !== this.store.revision;
  }

  async run(request: WhatIfRequest): Promise<RunOutcome> {
    if (this.inFlight) return "busy";
    const doc = this.store.document;
    if (doc === null) throw new RangeError("no document loaded");
    const revision = this.store.revision;
    this.inFlight = true;
    this.notify();
    try {
      const design =
        request.pusOverride != null
          ? await this.api.fetchTemplate(request.app, request.pusOverride)
          : doc;
      const result = await this.api.simulate({
        design,
        workload: { app: request.app, size: request.size },
      });
      if (revision !== this.store.revision) return "superseded";
      this.previous = this.current;
      this.current = { revision, request, result };
      this.problem = null;
      this.errorMessage = null;
      return "done";
    } catch (err) {
      if (err instanceof ApiProblem && err.status === 422) {
        if (revision !== this.store.revision) return "superseded";
        this.problem = { revision, request, payload: err.payload };
        this.errorMessage = null;
        return "infeasible";
      }
      this.errorMessage = String(err);
      return "failed";
    } finally {
      this.inFlight = false;
      this.notify();
    }
  }
}
