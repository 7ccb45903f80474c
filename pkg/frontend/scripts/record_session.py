"""Record a demo API session into the fixture the UI contract tests replay.

Run from the repository root with the package installed:

    python3 frontend/scripts/record_session.py
"""

import json
import os

from fastapi.testclient import TestClient

from kgalloc.service.app import create_app

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures",
                   "recorded-session.json")


def record() -> dict:
    session = {}
    app = create_app("demo", cases=0, mode="human", paused=True)
    with TestClient(app) as client:
        session["state_paused"] = client.get("/state").json()
        client.post("/control", json={"action": "resume"})
        session["decisions"] = client.get("/decisions").json()
        decision_id = session["decisions"][0]["id"]
        session["decision_id"] = decision_id

        rejected = client.post(f"/decisions/{decision_id}",
                               json={"resource": "User_55"})
        session["submit_ineligible_status"] = rejected.status_code
        session["submit_ineligible"] = rejected.json()

        session["neighborhood"] = client.get(
            "/graph/neighborhood", params={"node": "task-7", "depth": 2}
        ).json()

        proposal = client.post(
            "/updates",
            json={
                "additions": [
                    {"subject": "User_83", "predicate": "seniority",
                     "object": "High"}
                ],
                "removals": [
                    {"subject": "User_83", "predicate": "seniority",
                     "object": "Medium"}
                ],
                "provenance": "promotion",
            },
        ).json()
        session["proposal"] = proposal
        session["updates"] = client.get("/updates").json()

        accepted = client.post(f"/decisions/{decision_id}",
                               json={"resource": "User_26"})
        session["submit_ok"] = accepted.json()
        session["decisions_after_submit"] = client.get("/decisions").json()

        taken = client.post(f"/decisions/{decision_id}",
                            json={"resource": "User_26"})
        session["submit_conflict_status"] = taken.status_code
        session["submit_conflict"] = taken.json()

        session["explanations"] = client.get(
            "/explanations", params={"caseId": "case-1"}
        ).json()
    return session


if __name__ == "__main__":
    payload = record()
    with open(os.path.abspath(OUT), "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {os.path.abspath(OUT)}")
