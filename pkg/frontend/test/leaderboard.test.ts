import { describe, expect, it } from "vitest";

import { Report } from "../src/api.js";
import {
  leaderboardView,
  renderLeaderboardHtml,
  sortRows,
} from "../src/leaderboard.js";

const SYSTEMS = ["Strawman", "PCNN", "Bag-of-ngrams", "SCNN", "DCNN", "RNTN"];
const TEAMS = ["Utrecht", "OSU", "Melbourne", "VTeX"];

function fixtureReport(): Report {
  const matrix: Record<string, Record<string, number>> = {};
  for (const [i, system] of SYSTEMS.entries()) {
    matrix[system] = {};
    for (const [j, team] of TEAMS.entries()) {
      matrix[system][team] = ((i + j) % 5) * 25;
    }
  }
  return {
    builders: SYSTEMS.map((system, i) => ({
      system,
      avg_f1: 0.5 + i * 0.01,
      percent_broken: 70 - i * 5,
      per_team_f1: TEAMS.map((team) => ({ team, f1: 0.5 })),
      f1_variants: { macro: 0.5 },
    })),
    breakers: TEAMS.map((team, i) => ({
      team,
      score: 80 - i * 10,
      per_system: [],
    })),
    matrix,
    records: [],
  };
}

describe("leaderboardView", () => {
  it("renders a 6x4 matrix from the report fixture", () => {
    const view = leaderboardView(fixtureReport())!;
    expect(view.matrix.systems).toHaveLength(6);
    expect(view.matrix.teams).toHaveLength(4);
    expect(view.matrix.cells).toHaveLength(6);
    for (const row of view.matrix.cells) expect(row).toHaveLength(4);
    const i = view.matrix.systems.indexOf("PCNN");
    const j = view.matrix.teams.indexOf("OSU");
    expect(view.matrix.cells[i]![j]).toBe(fixtureReport().matrix["PCNN"]!["OSU"]);
  });

  it("carries builder and breaker numbers through untouched", () => {
    const view = leaderboardView(fixtureReport())!;
    expect(view.builders.find((b) => b.system === "Strawman")).toEqual({
      system: "Strawman",
      avgF1: 0.5,
      percentBroken: 70,
    });
    expect(view.breakers.map((b) => b.team)).toEqual(TEAMS);
  });

  it("returns null for an unscored round", () => {
    expect(leaderboardView(null)).toBeNull();
  });
});

describe("sortRows", () => {
  it("reorders without refetch or mutation", () => {
    const view = leaderboardView(fixtureReport())!;
    const original = [...view.breakers];
    const asc = sortRows(view.breakers, "score", "asc");
    expect(asc.map((b) => b.score)).toEqual([50, 60, 70, 80]);
    const desc = sortRows(asc, "score", "desc");
    expect(desc.map((b) => b.score)).toEqual([80, 70, 60, 50]);
    expect(view.breakers).toEqual(original);
  });

  it("sorts by string keys too", () => {
    const view = leaderboardView(fixtureReport())!;
    const byName = sortRows(view.builders, "system", "asc");
    expect(byName.map((b) => b.system)).toEqual([...SYSTEMS].sort());
  });
});

describe("renderLeaderboardHtml", () => {
  it("shows the placeholder when there is no report", () => {
    expect(renderLeaderboardHtml(null)).toContain("placeholder");
  });

  it("emits one matrix row per system and one cell per team", () => {
    const html = renderLeaderboardHtml(leaderboardView(fixtureReport()));
    for (const system of SYSTEMS) expect(html).toContain(system);
    for (const team of TEAMS) expect(html).toContain(team);
    const matrixSection = html.slice(html.indexOf('class="matrix"'));
    expect(matrixSection.match(/<tr>/g)).toHaveLength(1 + SYSTEMS.length);
  });

  it("escapes markup in names", () => {
    const report = fixtureReport();
    report.builders[0]!.system = "<script>alert(1)</script>";
    const html = renderLeaderboardHtml(leaderboardView(report));
    expect(html).not.toContain("<script>alert");
    expect(html).toContain("&lt;script&gt;");
  });
});
