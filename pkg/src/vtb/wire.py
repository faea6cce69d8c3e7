"""Newline-delimited JSON protocol exposing environments to other processes.

One request line maps to exactly one response line. Sessions own one
environment each and are fully isolated; the preset registry is read-only
after startup. Floats are serialized with Python's shortest round-trip
repr, so numeric values survive the wire bitwise. See docs/protocol.md for
the message-by-message reference.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

from . import presets
from .envcore import (
    BoxDim,
    DiscreteIndexOutOfRange,
    EnvConfig,
    Environment,
    InvalidSpace,
    NotReset,
    SpaceSpec,
    make_env,
    setpoint_box,
)
from .rewards import spec_from_dict
from .weather import OUParams

PROTOCOL_VERSION = 1

_ALLOWED_FIELDS = {
    "make": {"cmd", "preset", "config"},
    "reset": {"cmd", "session", "seed"},
    "step": {"cmd", "session", "action"},
    "spaces": {"cmd", "session"},
    "close": {"cmd", "session"},
}


class BindError(Exception):
    pass


def _err(code: str, message: str) -> dict:
    return {"ok": False, "code": code, "message": message}


def _space_payload(spec: SpaceSpec | None) -> dict | None:
    if spec is None:
        return None
    payload = {
        "kind": spec.kind,
        "dims": [{"name": d.name, "low": d.low, "high": d.high} for d in spec.dims],
    }
    if spec.kind == "discrete":
        payload["count"] = spec.count
        payload["table"] = [list(entry) for entry in spec.table]
    return payload


def _config_from_doc(doc: dict) -> EnvConfig:
    """Inline environment config carried by a make request."""
    doc = dict(doc)
    kwargs = {}
    if "building_file" not in doc or "weather_files" not in doc:
        raise ValueError("inline config needs building_file and weather_files")
    kwargs["building_file"] = doc.pop("building_file")
    wf = doc.pop("weather_files")
    kwargs["weather_files"] = tuple(wf) if isinstance(wf, list) else (wf,)
    if "action_space" in doc:
        spc = doc.pop("action_space")
        if spc is not None:
            kwargs["action_space"] = SpaceSpec(
                spc.get("kind", "box"),
                tuple(
                    BoxDim(d["name"], float(d["low"]), float(d["high"]))
                    for d in spc["dims"]
                ),
                table=tuple(tuple(e) for e in spc["table"]) if "table" in spc else None,
            )
        else:
            kwargs["action_space"] = None
    else:
        kwargs["action_space"] = setpoint_box()
    if "weather_variability" in doc:
        wv = doc.pop("weather_variability")
        kwargs["weather_variability"] = None if wv is None else OUParams(*wv)
    if "reward" in doc:
        kwargs["reward"] = spec_from_dict(doc.pop("reward"))
    for key in (
        "time_variables",
        "variables",
        "max_ep_data_store_num",
        "env_name",
        "timesteps_per_hour",
        "run_period",
        "substep_s",
    ):
        if key in doc:
            value = doc.pop(key)
            kwargs[key] = tuple(value) if isinstance(value, list) else value
    if doc:
        raise ValueError(f"unknown config fields: {sorted(doc)}")
    return EnvConfig(**kwargs)


@dataclass
class Session:
    """One environment bound to one client session."""

    session_id: str
    env: Environment

    def close(self) -> None:
        self.env.close()


class MessageHandler:
    """Maps request dicts onto environment operations for one connection."""

    def __init__(self, registry=None, output_root: Union[str, Path, None] = None):
        self.registry = registry if registry is not None else presets
        self.output_root = output_root
        self.session: Session | None = None

    def handle_line(self, line: str) -> dict:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return _err("BAD_JSON", f"not valid JSON: {exc}")
        if not isinstance(msg, dict):
            return _err("BAD_JSON", "request must be a JSON object")
        return self.handle_message(msg)

    def handle_message(self, msg: dict) -> dict:
        cmd = msg.get("cmd")
        if cmd not in _ALLOWED_FIELDS:
            return _err("UNKNOWN_CMD", f"unknown cmd: {cmd!r}")
        unknown = set(msg) - _ALLOWED_FIELDS[cmd]
        if unknown:
            return _err("BAD_JSON", f"unknown fields for {cmd}: {sorted(unknown)}")
        try:
            if cmd == "make":
                return self._make(msg)
            if self.session is None:
                return _err("NOT_RESET", "no session; send make first")
            if msg.get("session") != self.session.session_id:
                return _err("BAD_SESSION", "session id does not match")
            if cmd == "reset":
                return self._reset(msg)
            if cmd == "step":
                return self._step(msg)
            if cmd == "spaces":
                return self._spaces()
            return self._close()
        except NotReset as exc:
            return _err("NOT_RESET", str(exc))
        except (DiscreteIndexOutOfRange, InvalidSpace) as exc:
            return _err("BAD_ACTION", str(exc))
        except Exception as exc:  # noqa: BLE001 - reported to the client
            return _err("INTERNAL", f"{type(exc).__name__}: {exc}")

    def _make(self, msg: dict) -> dict:
        if self.session is not None:
            self.session.close()
            self.session = None
        if "preset" in msg:
            name = msg["preset"]
            try:
                config = self.registry.preset_config(name)
            except KeyError:
                return _err("UNKNOWN_PRESET", f"unknown preset: {name}")
        elif "config" in msg:
            try:
                config = _config_from_doc(msg["config"])
            except (ValueError, TypeError, KeyError) as exc:
                return _err("BAD_JSON", f"bad inline config: {exc}")
        else:
            return _err("BAD_JSON", "make needs 'preset' or 'config'")
        env = make_env(config, output_root=self.output_root)
        self.session = Session(session_id=uuid.uuid4().hex, env=env)
        return {
            "ok": True,
            "protocol": PROTOCOL_VERSION,
            "session": self.session.session_id,
            "env_name": config.env_name,
            "episode_steps": env.episode_steps,
        }

    def _reset(self, msg: dict) -> dict:
        seed = msg.get("seed")
        obs, info = self.session.env.reset(seed=seed)
        return {"ok": True, "observation": [float(v) for v in obs], "info": _json_info(info)}

    def _step(self, msg: dict) -> dict:
        if "action" not in msg:
            return _err("BAD_ACTION", "step needs 'action'")
        action = msg["action"]
        spec = self.session.env.action_spec
        if spec is not None and spec.kind == "discrete":
            if not isinstance(action, int) or isinstance(action, bool):
                return _err("BAD_ACTION", "discrete action must be an integer index")
        elif spec is not None:
            if not isinstance(action, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in action
            ):
                return _err("BAD_ACTION", "continuous action must be a list of numbers")
        res = self.session.env.step(action)
        return {
            "ok": True,
            "observation": [float(v) for v in res.observation],
            "reward": float(res.reward),
            "terminated": res.terminated,
            "truncated": res.truncated,
            "info": _json_info(res.info),
        }

    def _spaces(self) -> dict:
        obs, act = self.session.env.describe_spaces()
        return {
            "ok": True,
            "observation_space": _space_payload(obs),
            "action_space": _space_payload(act),
        }

    def _close(self) -> dict:
        self.session.close()
        self.session = None
        return {"ok": True}

    def shutdown(self) -> None:
        if self.session is not None:
            self.session.close()
            self.session = None


def _json_info(info: dict) -> dict:
    out = {}
    for key, value in info.items():
        if isinstance(value, tuple):
            out[key] = list(value)
        elif isinstance(value, list):
            out[key] = [float(v) for v in value]
        else:
            out[key] = value
    return out


def encode(payload: dict) -> str:
    """One response line; floats use shortest round-trip decimals."""
    return json.dumps(payload, allow_nan=False, separators=(",", ":")) + "\n"


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        server: VtbServer = self.server  # type: ignore[assignment]
        handler = MessageHandler(server.registry, server.output_root)
        self.connection.settimeout(server.idle_timeout)
        try:
            while True:
                try:
                    line = self.rfile.readline()
                except socket.timeout:
                    break  # idle session reaped; env closed in finally
                except (ConnectionResetError, OSError):
                    break
                if not line:
                    break
                text = line.decode("utf-8", errors="replace").strip()
                if not text:
                    continue
                response = handler.handle_line(text)
                try:
                    self.wfile.write(encode(response).encode("utf-8"))
                    self.wfile.flush()
                except (BrokenPipeError, OSError):
                    break
        finally:
            handler.shutdown()


class VtbServer(socketserver.ThreadingTCPServer):
    """One handler thread per connection; sessions are fully isolated."""

    daemon_threads = True
    allow_reuse_address = True

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        registry=None,
        output_root: Union[str, Path, None] = None,
        idle_timeout: float = 300.0,
    ):
        self.registry = registry if registry is not None else presets
        self.output_root = output_root
        self.idle_timeout = idle_timeout
        try:
            super().__init__((host, port), _Handler)
        except OSError as exc:
            raise BindError(f"cannot bind {host}:{port}: {exc}") from None

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve(
    host: str = "127.0.0.1",
    port: int = 0,
    output_root: Union[str, Path, None] = None,
    idle_timeout: float = 300.0,
    background: bool = False,
) -> VtbServer:
    """Start a TCP server; with background=True it runs on a daemon thread."""
    server = VtbServer(
        host=host, port=port, output_root=output_root, idle_timeout=idle_timeout
    )
    if background:
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
    else:
        server.serve_forever()
    return server


def serve_stdio(
    stdin: IO[str], stdout: IO[str], output_root: Union[str, Path, None] = None
) -> None:
    """Single-session loop over standard streams."""
    handler = MessageHandler(output_root=output_root)
    try:
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            stdout.write(encode(handler.handle_line(line)))
            stdout.flush()
    finally:
        handler.shutdown()
