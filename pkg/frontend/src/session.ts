import {
  ApiError,
  PairDraftPayload,
  PairsResponse,
  ProbeResponse,
  StarterItem,
} from "./api.js";

/** The slice of the harness API a breaker session needs; `HarnessClient`
 * satisfies it, tests can stub it. */
export interface WorkbenchClient {
  starter(roundId: string): Promise<StarterItem[]>;
  probe(
    roundId: string,
    body: { original: object; modified: object; labels: object },
  ): Promise<ProbeResponse>;
  submitPairs(
    roundId: string,
    team: string,
    pairs: PairDraftPayload[],
  ): Promise<PairsResponse>;
}

export interface PairDraft {
  originalId: string;
  original: Record<string, unknown>;
  modified: Record<string, unknown>;
  goldOriginal: unknown;
  goldModified: unknown;
  rationale: string;
}

export interface ProbeEntry {
  draft: PairDraft;
  response: ProbeResponse;
}

export interface SubmittedPair {
  pairId: string;
  draft: PairDraft;
}

/** One row of the verdict panel: a baseline's prediction on both sides,
 * flagged when the two labels differ (the breaker's goal). */
export interface VerdictRow {
  baseline: string;
  original: string;
  modified: string;
  disagree: boolean;
}

export interface VerdictPanel {
  violations: { code: string; detail: string }[];
  editCost: number | null;
  rows: VerdictRow[];
  warnings: string[];
}

function draftKey(draft: PairDraft): string {
  // rationale is metadata, not part of what the server validated
  const { rationale: _ignored, ...validated } = draft;
  return JSON.stringify(validated);
}

function clone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

/** Client-side state for one breaker working inside a round.
 *
 * The session never computes scores or verdicts itself: every number it
 * holds came from a harness response.  Its one policy is the stale-probe
 * guard: a pair may be submitted only when the most recent probe was run
 * on a byte-identical draft and came back clean.
 */
export class WorkbenchSession {
  readonly history: ProbeEntry[] = [];
  readonly submitted: SubmittedPair[] = [];
  private draft: PairDraft | null = null;
  private starterIds: Set<string> | null = null;
  private pairCounter = 0;

  constructor(
    private readonly client: WorkbenchClient,
    readonly roundId: string,
    readonly team: string,
  ) {}

  async loadStarter(): Promise<StarterItem[]> {
    const items = await this.client.starter(this.roundId);
    this.starterIds = new Set(items.map((item) => item.id));
    return items;
  }

  get currentDraft(): PairDraft | null {
    return this.draft ? clone(this.draft) : null;
  }

  setDraft(draft: PairDraft): void {
    if (this.starterIds && !this.starterIds.has(draft.originalId)) {
      throw new Error(
        `original ${JSON.stringify(draft.originalId)} is not a starter item of round ${this.roundId}`,
      );
    }
    this.draft = clone(draft);
  }

  /** Edit the modified side in place; any edit invalidates the last probe. */
  updateModified(patch: Record<string, unknown>): void {
    if (!this.draft) throw new Error("no draft to edit");
    this.draft = { ...this.draft, modified: { ...this.draft.modified, ...patch } };
  }

  setRationale(text: string): void {
    if (!this.draft) throw new Error("no draft to edit");
    this.draft = { ...this.draft, rationale: text };
  }

  /** True when the breaker skipped the (optional but encouraged) rationale. */
  get rationaleMissing(): boolean {
    return this.draft !== null && this.draft.rationale.trim() === "";
  }

  get lastProbe(): ProbeEntry | null {
    return this.history.length > 0 ? this.history[this.history.length - 1]! : null;
  }

  /** Stale-probe guard: the latest probe must match the current draft
   * exactly and must have reported zero violations. */
  get canSubmit(): boolean {
    const last = this.lastProbe;
    if (!this.draft || !last) return false;
    if (draftKey(last.draft) !== draftKey(this.draft)) return false;
    return last.response.violations.length === 0;
  }

  async probe(): Promise<VerdictPanel> {
    if (!this.draft) throw new Error("no draft to probe");
    const snapshot = clone(this.draft);
    const response = await this.client.probe(this.roundId, {
      original: snapshot.original,
      modified: snapshot.modified,
      labels: {
        original_id: snapshot.originalId,
        gold_original: snapshot.goldOriginal,
        gold_modified: snapshot.goldModified,
      },
    });
    this.history.push({ draft: snapshot, response });
    return verdictPanel(response, { rationaleMissing: this.rationaleMissing });
  }

  async submit(pairId?: string): Promise<SubmittedPair> {
    if (!this.draft) throw new Error("no draft to submit");
    if (!this.canSubmit) {
      throw new Error("probe the current draft (with zero violations) before submitting");
    }
    this.pairCounter += 1;
    const id = pairId ?? `${this.team}-${this.pairCounter}`;
    const payload: PairDraftPayload = {
      pair_id: id,
      team: this.team,
      task: taskOf(this.draft),
      original_id: this.draft.originalId,
      original: this.draft.original,
      modified: this.draft.modified,
      gold_original: this.draft.goldOriginal,
      gold_modified: this.draft.goldModified,
    };
    if (this.draft.rationale.trim() !== "") payload.rationale = this.draft.rationale;
    let result;
    try {
      result = await this.client.submitPairs(this.roundId, this.team, [payload]);
    } catch (err) {
      if (err instanceof ApiError) {
        // phase error or duplicate: surface verbatim, keep the draft intact
        throw new Error(`submission rejected: ${err.detail}`);
      }
      throw err;
    }
    const entry = result.report.find((r) => r.pair_id === id);
    if (entry && entry.violations.length > 0) {
      throw new Error(
        `server rejected pair ${id}: ${entry.violations.map((v) => v.code).join(", ")}`,
      );
    }
    const record = { pairId: id, draft: clone(this.draft) };
    this.submitted.push(record);
    return record;
  }
}

function taskOf(draft: PairDraft): string {
  return "question" in draft.original ? "qasrl" : "sentiment";
}

export function verdictPanel(
  response: ProbeResponse,
  opts: { rationaleMissing?: boolean } = {},
): VerdictPanel {
  const rows: VerdictRow[] = Object.entries(response.predictions).map(
    ([baseline, sides]) => ({
      baseline,
      original: sides.original.label,
      modified: sides.modified.label,
      disagree: sides.original.label !== sides.modified.label,
    }),
  );
  const warnings: string[] = [];
  if (response.edit_cost === 0) {
    warnings.push("original and modified are identical (edit cost 0)");
  }
  if (opts.rationaleMissing) {
    warnings.push("consider adding a rationale before submitting");
  }
  return {
    violations: response.violations,
    editCost: response.edit_cost,
    rows,
    warnings,
  };
}
