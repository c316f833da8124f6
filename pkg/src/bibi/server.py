"""HTTP API over a round store, consumed by the breaker workbench.

Read endpoints work in any phase (dev predictions only once breaking has
opened); pair submission and probing are restricted to the BREAK phase and
return 409 otherwise.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .corpus import CorpusError, Task, ingest_predictions
from .harness import HarnessError, Phase, PhaseError, Round, RoundStore


class ProbeRequest(BaseModel):
    original: dict
    modified: dict
    labels: dict


class PairsRequest(BaseModel):
    team: str
    pairs: list[dict]


def create_app(store: RoundStore) -> FastAPI:
    app = FastAPI(title="bibi harness")

    def get_round(round_id: str) -> Round:
        try:
            return store.load(round_id)
        except HarnessError:
            raise HTTPException(status_code=404, detail=f"no round {round_id!r}")

    @app.get("/rounds")
    def list_rounds() -> list[dict]:
        out = []
        for rid in store.round_ids():
            rnd = store.load(rid)
            out.append({"round_id": rid, "task": rnd.task.value, "phase": rnd.phase.value})
        return out

    @app.get("/rounds/{round_id}")
    def round_detail(round_id: str) -> dict:
        rnd = get_round(round_id)
        return {
            "round_id": rnd.round_id,
            "task": rnd.task.value,
            "phase": rnd.phase.value,
            "phase_history": rnd.manifest["phase_history"],
            "systems": sorted(rnd.manifest.get("systems", {})),
            "teams": sorted(rnd.manifest.get("teams", {})),
            "baselines": sorted(rnd.manifest.get("models", {})),
        }

    @app.get("/rounds/{round_id}/dev-predictions")
    def dev_predictions(round_id: str) -> dict:
        rnd = get_round(round_id)
        if rnd.phase is Phase.BUILD:
            raise HTTPException(
                status_code=409, detail="dev predictions are published when breaking opens"
            )
        out: dict[str, dict[str, str]] = {}
        for system, entry in sorted(rnd.manifest.get("systems", {}).items()):
            table = ingest_predictions(rnd.dir / entry["dev_predictions"], rnd.task)
            out[system] = table.items_for(system)
        return out

    @app.get("/rounds/{round_id}/starter")
    def starter(round_id: str) -> list[dict]:
        rnd = get_round(round_id)
        items = []
        with open(rnd.dataset_path("starter"), encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    items.append(json.loads(line))
        return items

    @app.post("/rounds/{round_id}/probe")
    def probe(round_id: str, req: ProbeRequest) -> dict:
        rnd = get_round(round_id)
        try:
            return rnd.probe(req.original, req.modified, req.labels)
        except PhaseError as e:
            raise HTTPException(status_code=409, detail=str(e))
        except (HarnessError, CorpusError, KeyError) as e:
            raise HTTPException(status_code=400, detail=str(e))

    @app.post("/rounds/{round_id}/pairs")
    def submit_pairs(round_id: str, req: PairsRequest) -> dict:
        rnd = get_round(round_id)
        with tempfile.NamedTemporaryFile(
            "w", suffix=".jsonl", delete=False, encoding="utf-8"
        ) as f:
            for pair in req.pairs:
                f.write(json.dumps(pair) + "\n")
            tmp = Path(f.name)
        try:
            report = rnd.submit_pairs(req.team, tmp)
        except PhaseError as e:
            raise HTTPException(status_code=409, detail=str(e))
        except (HarnessError, CorpusError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        finally:
            tmp.unlink(missing_ok=True)
        return {"team": req.team, "report": report}

    @app.get("/rounds/{round_id}/report")
    def report(round_id: str) -> dict:
        rnd = get_round(round_id)
        path = rnd.dir / "report.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail="round has not been scored yet")
        return json.loads(path.read_text(encoding="utf-8"))

    return app
