"""Server fixture: the adapter talks to the testbed only over its CLI and
wire protocol, so tests launch `vtb serve` as a subprocess."""

import json
import re
import subprocess
import sys
import time

import pytest


@pytest.fixture(scope="session")
def server(tmp_path_factory):
    root = tmp_path_factory.mktemp("server-root")
    proc = subprocess.Popen(
        [sys.executable, "-m", "vtb.cli", "serve", "--port", "0",
         "--output-root", str(root)],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    line = proc.stdout.readline()
    match = re.search(r"listening on ([\d.]+):(\d+)", line)
    if not match:
        proc.kill()
        raise RuntimeError(f"server did not announce a port: {line!r}")
    host, port = match.group(1), int(match.group(2))
    yield host, port
    proc.terminate()
    try:
        proc.wait(timeout=10)
    except subprocess.TimeoutExpired:
        proc.kill()


@pytest.fixture(scope="session")
def env_doc(tmp_path_factory):
    """Inline EnvConfig document shared by adapter and CLI runs (two days)."""
    out = subprocess.run(
        [sys.executable, "-c",
         "from vtb.presets import building_path, weather_path;"
         "print(building_path('datacenter'));print(weather_path('mixed'))"],
        capture_output=True, text=True, check=True,
    )
    building, weather = out.stdout.strip().splitlines()
    return {
        "building_file": building,
        "weather_files": [weather],
        "run_period": [1, 1, 1, 2],
        "substep_s": 900.0,
        "env_name": "adapter-test-env",
    }


@pytest.fixture(scope="session")
def env_doc_file(env_doc, tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "env.json"
    path.write_text(json.dumps(env_doc))
    return path
