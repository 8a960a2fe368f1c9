"""Validate bundled fixtures and live CLI/service output against docs/schemas."""
import json
import pathlib
import subprocess
import sys
import urllib.request

import jsonschema
from referencing import Registry, Resource

cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
schemas = {p.name: json.loads(p.read_text()) for p in (root / "docs" / "schemas").glob("*.json")}
registry = Registry().with_resources((name, Resource.from_contents(s)) for name, s in schemas.items())
data = root / "data"
failures = 0


def check(schema, doc, label):
    global failures
    validator = jsonschema.Draft202012Validator(schemas[schema], registry=registry)
    errors = list(validator.iter_errors(doc))
    for e in errors[:3]:
        print(f"{label}: {'/'.join(map(str, e.absolute_path))}: {e.message}")
    failures += bool(errors)


def load(path):
    return json.loads(path.read_text())


for p in (data / "vehicles").glob("*.json"):
    check("vehicle.schema.json", load(p), p.name)
for p in (data / "templates").glob("*.json"):
    check("template.schema.json", load(p), p.name)
for p in (data / "fixtures" / "requests").glob("*.json"):
    check("request.schema.json", load(p), p.name)
check("weather.schema.json", load(data / "fixtures" / "weather.json"), "weather.json")
check("pilots.schema.json", load(data / "fixtures" / "pilots.json"), "pilots.json")
for name in ("policy.json", "policy-open.json"):
    check("policy.schema.json", load(data / "fixtures" / name), name)

now = "2026-06-01T12:00:00Z"
for req in ("instance-1", "instance-2", "beyond-horizon", "home-built"):
    path = str(data / "fixtures" / "requests" / f"{req}.json")
    out = subprocess.run([cli, "instantiate", "--request", path, "--now", now], capture_output=True, text=True)
    check("case.schema.json", json.loads(out.stdout), f"instantiate {req}")
    out = subprocess.run([cli, "instantiate", "--request", path, "--now", now, "--what-if", "gusts=3"],
                         capture_output=True, text=True)
    check("case.schema.json", json.loads(out.stdout), f"instantiate {req} what-if")

port = 18400 + __import__("os").getpid() % 1000
server = subprocess.Popen([cli, "serve", "--port", str(port), "--policy", str(data / "fixtures" / "policy-open.json"),
                           "--now", now], stderr=subprocess.DEVNULL)
base = f"http://127.0.0.1:{port}"


def call(method, path, body=None):
    req = urllib.request.Request(base + path, method=method,
                                 data=None if body is None else json.dumps(body).encode())
    try:
        with urllib.request.urlopen(req, timeout=10) as r:
            return r.status, json.loads(r.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read())


try:
    import time
    for _ in range(100):
        try:
            call("GET", "/templates")
            break
        except OSError:
            time.sleep(0.05)
    for req in ("instance-1", "instance-2", "beyond-horizon"):
        status, body = call("POST", "/requests", load(data / "fixtures" / "requests" / f"{req}.json"))
        check("submit-response.schema.json", body, f"POST /requests {req} ({status})")
        rid = body["requestId"]
        check("request.schema.json", call("GET", f"/requests/{rid}")[1], f"GET /requests/{rid}")
        check("case.schema.json", call("GET", f"/requests/{rid}/case")[1], f"GET case {rid}")
        check("decision.schema.json", call("GET", f"/requests/{rid}/decision")[1], f"GET decision {rid}")
        check("case.schema.json", call("POST", f"/requests/{rid}/what-if", {"gusts": 2, "visibility": "unlimited"})[1],
              f"what-if {rid}")
    for t in call("GET", "/templates")[1]:
        check("template.schema.json", t, f"GET /templates {t['templateId']}")
        check("required-evidence.schema.json", call("GET", f"/templates/{t['templateId']}/required-evidence")[1],
              f"required-evidence {t['templateId']}")
    check("feature-model.schema.json", call("GET", "/feature-model")[1], "GET /feature-model")
    for method, path, body in (("GET", "/requests/none", None), ("POST", "/requests", {"pilotId": 1}),
                               ("POST", "/requests/req-instance-1/what-if", {"wind": 3})):
        check("error.schema.json", call(method, path, body)[1], f"{method} {path}")
finally:
    server.terminate()
    server.wait()

print("schema check:", "FAILED" if failures else "ok")
sys.exit(1 if failures else 0)
