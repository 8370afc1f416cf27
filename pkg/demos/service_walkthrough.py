#!/usr/bin/env python3
"""Drive the credit dialogue over HTTP.

Starts `rationale --serve` as a child process, creates a session, registers
the model, pins the factual applicant, asks for the cheapest approval,
retracts a constraint, and shuts the server down.
"""

import json
import subprocess
import sys
import time
import urllib.error
import urllib.request
from pathlib import Path

HERE = Path(__file__).parent
ADDR = "127.0.0.1:8199"
BASE = f"http://{ADDR}"


def call(method: str, path: str, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(BASE + path, data=data, method=method)
    if data is not None:
        req.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(req) as resp:
        raw = resp.read()
    return json.loads(raw) if raw else None


def wait_up(attempts: int = 50) -> None:
    for _ in range(attempts):
        try:
            urllib.request.urlopen(BASE + "/sessions/none")
            return
        except urllib.error.HTTPError:
            return
        except urllib.error.URLError:
            time.sleep(0.1)
    raise SystemExit("server did not come up")


def main() -> int:
    meta = json.loads((HERE / "credit" / "meta.json").read_text())
    tree = json.loads((HERE / "credit" / "credit.json").read_text())
    srv = subprocess.Popen(
        [sys.executable, "-m", "rationale.cli",
         "--meta", str(HERE / "credit" / "meta.json"), "--serve", ADDR]
    )
    try:
        wait_up()
        sid = call("POST", "/sessions", {"metadata": meta})["session_id"]
        print("session:", sid)
        call("POST", f"/sessions/{sid}/models", tree)
        call("POST", f"/sessions/{sid}/instances",
             {"name": "F", "model_id": "credit", "label": "deny"})
        call("POST", f"/sessions/{sid}/constraints",
             {"text": "F.age = 35, F.income = 40000, F.lease = active"})
        call("POST", f"/sessions/{sid}/instances",
             {"name": "CE", "model_id": "credit", "label": "approve"})

        answer = call("POST", f"/sessions/{sid}/solve",
                      {"project": ["CE"], "minimize": "l1norm(F, CE)"})
        print("cheapest approval:", json.dumps(answer, indent=2))

        cid = call("POST", f"/sessions/{sid}/constraints",
                   {"text": "CE.age <= 35"})["constraint_id"]
        answer = call("POST", f"/sessions/{sid}/solve",
                      {"project": ["CE"], "minimize": "l1norm(F, CE)"})
        print("with the age cap:", json.dumps(answer))

        call("DELETE", f"/sessions/{sid}/constraints/{cid}")
        answer = call("POST", f"/sessions/{sid}/solve",
                      {"project": ["CE"], "minimize": "l1norm(F, CE)"})
        print("cap retracted, answer is back:", json.dumps(answer))

        script = call("GET", f"/sessions/{sid}/script")
        print("replayable script:\n" + script["script"], end="")
    finally:
        srv.terminate()
        srv.wait()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
