"""Driving an environment over the wire protocol from a scripted client.

Starts the server in-process, opens a session over loopback, and runs a
short control exchange with raw JSON lines (any language could do this).
"""

import json
import socket
import tempfile
import threading

from vtb.wire import VtbServer

with tempfile.TemporaryDirectory() as td:
    server = VtbServer(port=0, output_root=td)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    print(f"server on 127.0.0.1:{server.port}\n")

    sock = socket.create_connection(("127.0.0.1", server.port))
    fh = sock.makefile("rwb")

    def call(payload):
        print(f"-> {json.dumps(payload)[:90]}")
        fh.write((json.dumps(payload) + "\n").encode())
        fh.flush()
        response = json.loads(fh.readline().decode())
        shown = json.dumps(response)
        print(f"<- {shown[:90]}{'...' if len(shown) > 90 else ''}")
        return response

    made = call({"cmd": "make", "preset": "vtb-datacenter-mixed-continuous-v1"})
    sid = made["session"]
    call({"cmd": "spaces", "session": sid})
    call({"cmd": "reset", "session": sid, "seed": 7})
    for action in ([20.0, 23.0], [18.0, 26.0], [99.0, -5.0]):  # last one clamps
        call({"cmd": "step", "session": sid, "action": action})
    call({"cmd": "step", "session": sid, "action": "bad"})  # BAD_ACTION
    call({"cmd": "close", "session": sid})

    sock.close()
    server.shutdown()
    server.server_close()
