"""
Driving the HTTP decision gateway
=================================

The gateway exposes the controller over HTTP: POST a request's scores to
/v1/decide, report measured outcomes to /v1/outcome, and scrape /v1/state
or /v1/metrics.  Here both server and client run in one process.
"""

import json
import threading
import urllib.request

from greengate import ControllerConfig, GatewayState, make_server

state = GatewayState(ControllerConfig(tau0=0.9, tau_inf=0.4, k=1.0))
server = make_server(state, port=0)
port = server.server_address[1]
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{port}"
print(f"gateway up on {base}")


def post(path, body):
    req = urllib.request.Request(base + path, data=json.dumps(body).encode(),
                                 headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req) as resp:
        raw = resp.read()
        return json.loads(raw) if raw else None


def get(path):
    with urllib.request.urlopen(base + path) as resp:
        return resp.read().decode()


# decisions: uncertain scores clear the bar, confident ones are shed
for scores in [[0.5, 0.5], [0.8, 0.2], [0.97, 0.03]]:
    decision = post("/v1/decide", {"id": f"req-{scores[0]}", "scores": scores})
    print(f"scores={scores}: admit={decision['admit']} "
          f"(J={decision['j']:.3f} vs tau={decision['tau']:.3f})")

# feed back what serving actually cost
post("/v1/outcome", {"id": "req-0.5", "latency_ms": 14.2, "joules": 3.1, "queue_depth": 1})
post("/v1/outcome", {"id": "req-0.8", "latency_ms": 11.8, "joules": 2.6, "queue_depth": 0})

print("\nstate:", json.dumps(json.loads(get("/v1/state")), indent=2))
print("metrics:")
print(get("/v1/metrics"), end="")

server.shutdown()
server.server_close()
