import { z } from "zod";

export const RoundSummary = z.object({
  round_id: z.string(),
  task: z.enum(["sentiment", "qasrl"]),
  phase: z.enum(["BUILD", "BREAK", "SCORE", "CLOSED"]),
});
export type RoundSummary = z.infer<typeof RoundSummary>;

export const RoundDetail = RoundSummary.extend({
  phase_history: z.array(z.object({ phase: z.string(), at: z.string() })),
  systems: z.array(z.string()),
  teams: z.array(z.string()),
  baselines: z.array(z.string()),
});
export type RoundDetail = z.infer<typeof RoundDetail>;

export const StarterItem = z
  .object({ id: z.string() })
  .passthrough(); // sentiment items carry text/value, QA-SRL ones sentence/question
export type StarterItem = z.infer<typeof StarterItem>;

export const Violation = z.object({ code: z.string(), detail: z.string() });
export type Violation = z.infer<typeof Violation>;

const SidePrediction = z.object({ label: z.string(), score: z.number() });

export const ProbeResponse = z.object({
  violations: z.array(Violation),
  edit_cost: z.number().nullable(),
  predictions: z.record(
    z.object({ original: SidePrediction, modified: SidePrediction }),
  ),
});
export type ProbeResponse = z.infer<typeof ProbeResponse>;

export const PairReportEntry = z.object({
  pair_id: z.string(),
  violations: z.array(Violation),
  edit_cost: z.number().nullable(),
});
export const PairsResponse = z.object({
  team: z.string(),
  report: z.array(PairReportEntry),
});
export type PairsResponse = z.infer<typeof PairsResponse>;

export const Report = z.object({
  builders: z.array(
    z.object({
      system: z.string(),
      avg_f1: z.number(),
      percent_broken: z.number(),
      per_team_f1: z.array(z.object({ team: z.string(), f1: z.number() })),
      f1_variants: z.record(z.number()),
    }),
  ),
  breakers: z.array(
    z.object({
      team: z.string(),
      score: z.number(),
      per_system: z.array(
        z.object({
          system: z.string(),
          break_count: z.number(),
          pair_count: z.number(),
          weighted_term: z.number(),
        }),
      ),
    }),
  ),
  matrix: z.record(z.record(z.number())),
  records: z.array(
    z.object({
      system: z.string(),
      pair_id: z.string(),
      correct_original: z.boolean(),
      correct_modified: z.boolean(),
      breaks: z.boolean(),
    }),
  ),
});
export type Report = z.infer<typeof Report>;

export interface PairDraftPayload {
  pair_id: string;
  team: string;
  task: string;
  original_id: string;
  original: Record<string, unknown>;
  modified: Record<string, unknown>;
  gold_original: unknown;
  gold_modified: unknown;
  rationale?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function parseBody(res: Response): Promise<unknown> {
  const text = await res.text();
  try {
    return JSON.parse(text);
  } catch {
    return text;
  }
}

/** Thin typed client over the harness HTTP API; the only network surface
 * the workbench uses. */
export class HarnessClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await parseBody(res);
    if (!res.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : String(body);
      throw new ApiError(res.status, detail);
    }
    return body;
  }

  async listRounds(): Promise<RoundSummary[]> {
    return z.array(RoundSummary).parse(await this.request("/rounds"));
  }

  async roundDetail(roundId: string): Promise<RoundDetail> {
    return RoundDetail.parse(await this.request(`/rounds/${roundId}`));
  }

  async starter(roundId: string): Promise<StarterItem[]> {
    return z.array(StarterItem).parse(await this.request(`/rounds/${roundId}/starter`));
  }

  async devPredictions(roundId: string): Promise<Record<string, Record<string, string>>> {
    return z
      .record(z.record(z.string()))
      .parse(await this.request(`/rounds/${roundId}/dev-predictions`));
  }

  async probe(
    roundId: string,
    body: { original: object; modified: object; labels: object },
  ): Promise<ProbeResponse> {
    return ProbeResponse.parse(
      await this.request(`/rounds/${roundId}/probe`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  async submitPairs(
    roundId: string,
    team: string,
    pairs: PairDraftPayload[],
  ): Promise<PairsResponse> {
    return PairsResponse.parse(
      await this.request(`/rounds/${roundId}/pairs`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ team, pairs }),
      }),
    );
  }

  /** Returns null while the round has not been scored yet (the
   * leaderboard's placeholder state). */
  async report(roundId: string): Promise<Report | null> {
    try {
      return Report.parse(await this.request(`/rounds/${roundId}/report`));
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return null;
      throw err;
    }
  }
}
