import { Report } from "./api.js";

export interface BuilderRow {
  system: string;
  avgF1: number;
  percentBroken: number;
}

export interface BreakerRow {
  team: string;
  score: number;
}

/** System-by-team grid of breaking percentages, already in display order. */
export interface MatrixView {
  systems: string[];
  teams: string[];
  cells: number[][]; // cells[i][j] = percent of team j's pairs breaking system i
}

export interface LeaderboardView {
  builders: BuilderRow[];
  breakers: BreakerRow[];
  matrix: MatrixView;
}

/** Shape a scored report for display; null report means "not scored yet"
 * and callers render the placeholder instead. */
export function leaderboardView(report: Report | null): LeaderboardView | null {
  if (report === null) return null;
  const builders = report.builders.map((b) => ({
    system: b.system,
    avgF1: b.avg_f1,
    percentBroken: b.percent_broken,
  }));
  const breakers = report.breakers.map((b) => ({ team: b.team, score: b.score }));
  const systems = Object.keys(report.matrix).sort();
  const teams = [
    ...new Set(systems.flatMap((s) => Object.keys(report.matrix[s] ?? {}))),
  ].sort();
  const cells = systems.map((system) =>
    teams.map((team) => report.matrix[system]?.[team] ?? 0),
  );
  return { builders, breakers, matrix: { systems, teams, cells } };
}

export type SortDirection = "asc" | "desc";

/** Reorder already-fetched rows client-side; no refetch, input untouched. */
export function sortRows<T>(
  rows: readonly T[],
  key: keyof T,
  direction: SortDirection = "desc",
): T[] {
  const sign = direction === "desc" ? -1 : 1;
  return [...rows].sort((a, b) => {
    const x = a[key];
    const y = b[key];
    if (x === y) return 0;
    return (x < y ? -1 : 1) * sign;
  });
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderLeaderboardHtml(view: LeaderboardView | null): string {
  if (view === null) {
    return '<p class="placeholder">No report yet: the round has not been scored.</p>';
  }
  const builderRows = view.builders
    .map(
      (b) =>
        `<tr><td>${escapeHtml(b.system)}</td><td>${b.avgF1.toFixed(2)}</td>` +
        `<td>${b.percentBroken.toFixed(2)}%</td></tr>`,
    )
    .join("");
  const breakerRows = view.breakers
    .map((b) => `<tr><td>${escapeHtml(b.team)}</td><td>${b.score.toFixed(2)}</td></tr>`)
    .join("");
  const header = view.matrix.teams.map((t) => `<th>${escapeHtml(t)}</th>`).join("");
  const matrixRows = view.matrix.cells
    .map((row, i) => {
      const cells = row
        .map((pct) => {
          // darker cell = more broken, so hot spots pop out of the grid
          const alpha = Math.min(1, pct / 100);
          return `<td style="background:rgba(200,40,40,${alpha.toFixed(2)})">${pct.toFixed(0)}</td>`;
        })
        .join("");
      return `<tr><th>${escapeHtml(view.matrix.systems[i] ?? "")}</th>${cells}</tr>`;
    })
    .join("");
  return [
    '<table class="builders"><thead><tr><th>System</th><th>Avg F1</th><th>Broken</th></tr></thead>',
    `<tbody>${builderRows}</tbody></table>`,
    '<table class="breakers"><thead><tr><th>Team</th><th>Score</th></tr></thead>',
    `<tbody>${breakerRows}</tbody></table>`,
    `<table class="matrix"><thead><tr><th></th>${header}</tr></thead>`,
    `<tbody>${matrixRows}</tbody></table>`,
  ].join("\n");
}
