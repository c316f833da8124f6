import { HarnessClient, StarterItem } from "./api.js";
import { leaderboardView, renderLeaderboardHtml } from "./leaderboard.js";
import { VerdictPanel, WorkbenchSession } from "./session.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function renderVerdictHtml(panel: VerdictPanel): string {
  const violations = panel.violations
    .map((v) => `<li class="violation">${v.code}: ${v.detail}</li>`)
    .join("");
  const rows = panel.rows
    .map(
      (r) =>
        `<tr class="${r.disagree ? "break" : "no-break"}">` +
        `<td>${r.baseline}</td><td>${r.original}</td><td>${r.modified}</td></tr>`,
    )
    .join("");
  const warnings = panel.warnings.map((w) => `<li class="warning">${w}</li>`).join("");
  return [
    violations ? `<ul>${violations}</ul>` : '<p class="ok">No violations.</p>',
    `<p>Edit cost: ${panel.editCost ?? "n/a"}</p>`,
    `<table><thead><tr><th>Baseline</th><th>Original</th><th>Modified</th></tr></thead><tbody>${rows}</tbody></table>`,
    warnings ? `<ul>${warnings}</ul>` : "",
  ].join("\n");
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(location.search);
  const baseUrl = params.get("api") ?? "http://127.0.0.1:8000";
  const client = new HarnessClient(baseUrl);

  const rounds = await client.listRounds();
  const active = rounds.find((r) => r.phase === "BREAK") ?? rounds[0];
  if (!active) {
    el("app").textContent = "No rounds available.";
    return;
  }
  const team = params.get("team") ?? "anonymous";
  const session = new WorkbenchSession(client, active.round_id, team);
  const starter = await session.loadStarter();

  const picker = el<HTMLSelectElement>("starter-picker");
  for (const item of starter) {
    const option = document.createElement("option");
    option.value = item.id;
    option.textContent = `${item.id}: ${String((item as StarterItem & { text?: string }).text ?? "")}`;
    picker.appendChild(option);
  }

  const editor = el<HTMLTextAreaElement>("modified-text");
  const rationale = el<HTMLTextAreaElement>("rationale");
  const goldOriginal = el<HTMLSelectElement>("gold-original");
  const goldModified = el<HTMLSelectElement>("gold-modified");
  const submitButton = el<HTMLButtonElement>("submit");
  const banner = el("banner");

  const refreshDraft = () => {
    const item = starter.find((s) => s.id === picker.value);
    if (!item) return;
    session.setDraft({
      originalId: item.id,
      original: { text: String((item as { text?: string }).text ?? "") },
      modified: { text: editor.value },
      goldOriginal: Number(goldOriginal.value),
      goldModified: Number(goldModified.value),
      rationale: rationale.value,
    });
    submitButton.disabled = !session.canSubmit;
  };

  picker.addEventListener("change", () => {
    const item = starter.find((s) => s.id === picker.value);
    editor.value = String((item as { text?: string } | undefined)?.text ?? "");
    refreshDraft();
  });
  for (const input of [editor, rationale, goldOriginal, goldModified]) {
    input.addEventListener("input", refreshDraft);
  }

  el<HTMLButtonElement>("probe").addEventListener("click", async () => {
    refreshDraft();
    try {
      const panel = await session.probe();
      el("verdict").innerHTML = renderVerdictHtml(panel);
    } catch (err) {
      banner.textContent = String(err);
    }
    submitButton.disabled = !session.canSubmit;
  });

  submitButton.addEventListener("click", async () => {
    try {
      const record = await session.submit();
      banner.textContent = `Submitted ${record.pairId}.`;
    } catch (err) {
      banner.textContent = String(err);
    }
    submitButton.disabled = !session.canSubmit;
  });

  el<HTMLButtonElement>("load-report").addEventListener("click", async () => {
    const report = await client.report(active.round_id);
    el("leaderboard").innerHTML = renderLeaderboardHtml(leaderboardView(report));
  });
}

boot().catch((err) => {
  document.body.insertAdjacentHTML("beforeend", `<pre>${String(err)}</pre>`);
});
