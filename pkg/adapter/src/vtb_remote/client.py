"""Protocol-v1 client exposing a remote environment through the standard
agent-environment API: reset/step tuples, space objects, close.

The adapter is a pure protocol client: no physics and no rewards live
here. Connection failures surface immediately and no reconnection is
attempted; a broken session is a broken environment.
"""

from __future__ import annotations

import json
import socket
from typing import Any

import numpy as np

from .spaces import Box, Discrete


class RemoteError(Exception):
    """Server-reported error, carrying the protocol error code."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


class SessionClosed(RemoteError):
    def __init__(self):
        super().__init__("SESSION_CLOSED", "session already closed")


class WireConnection:
    """One line-delimited JSON exchange channel."""

    def __init__(self, host: str, port: int, timeout: float = 60.0):
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ConnectionError(f"cannot connect to {host}:{port}: {exc}") from None
        self._file = self._sock.makefile("rwb")

    def call(self, payload: dict) -> dict:
        line = json.dumps(payload, allow_nan=False) + "\n"
        try:
            self._file.write(line.encode("utf-8"))
            self._file.flush()
            raw = self._file.readline()
        except OSError as exc:
            raise ConnectionError(f"connection lost: {exc}") from None
        if not raw:
            raise ConnectionError("server closed the connection")
        response = json.loads(raw.decode("utf-8"))
        if not response.get("ok", False):
            raise RemoteError(response.get("code", "UNKNOWN"), response.get("message", ""))
        return response

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


def _space_from_payload(payload: dict | None):
    if payload is None:
        return None
    if payload["kind"] == "discrete":
        return Discrete(payload["count"])
    names = [d["name"] for d in payload["dims"]]
    return Box(
        [d["low"] for d in payload["dims"]],
        [d["high"] for d in payload["dims"]],
        names=names,
    )


class RemoteEnv:
    """Remote environment handle.

    Spaces are fetched once at construction and are immutable afterwards.
    """

    def __init__(self, conn: WireConnection, made: dict):
        self._conn = conn
        self.session_id = made["session"]
        self.protocol = made["protocol"]
        self.env_name = made.get("env_name")
        self.episode_steps = made.get("episode_steps")
        spaces = conn.call({"cmd": "spaces", "session": self.session_id})
        self.observation_space = _space_from_payload(spaces["observation_space"])
        self.action_space = _space_from_payload(spaces["action_space"])
        self._closed = False

    def _call(self, payload: dict) -> dict:
        if self._closed:
            raise SessionClosed()
        payload["session"] = self.session_id
        return self._conn.call(payload)

    def reset(self, seed: int | None = None) -> tuple[np.ndarray, dict[str, Any]]:
        msg: dict[str, Any] = {"cmd": "reset"}
        if seed is not None:
            msg["seed"] = int(seed)
        res = self._call(msg)
        return np.asarray(res["observation"], dtype=np.float64), res["info"]

    def step(self, action) -> tuple[np.ndarray, float, bool, bool, dict[str, Any]]:
        if isinstance(action, np.ndarray):
            action = [float(v) for v in action.reshape(-1)]
        elif isinstance(action, (np.integer, int)) and not isinstance(action, bool):
            action = int(action)
        elif isinstance(action, (list, tuple)):
            action = [float(v) for v in action]
        res = self._call({"cmd": "step", "action": action})
        return (
            np.asarray(res["observation"], dtype=np.float64),
            float(res["reward"]),
            bool(res["terminated"]),
            bool(res["truncated"]),
            res["info"],
        )

    def close(self) -> None:
        if self._closed:
            return
        try:
            self._call({"cmd": "close"})
        finally:
            self._closed = True
            self._conn.close()


def remote_make(
    host: str,
    port: int,
    preset: str | None = None,
    config: dict | None = None,
    timeout: float = 60.0,
) -> RemoteEnv:
    """Open a session and build a handle from a preset name or inline config."""
    if (preset is None) == (config is None):
        raise ValueError("pass exactly one of preset or config")
    conn = WireConnection(host, port, timeout=timeout)
    request: dict[str, Any] = {"cmd": "make"}
    if preset is not None:
        request["preset"] = preset
    else:
        request["config"] = config
    try:
        made = conn.call(request)
    except Exception:
        conn.close()
        raise
    return RemoteEnv(conn, made)


def remote_reset(env: RemoteEnv, seed: int | None = None):
    return env.reset(seed=seed)


def remote_step(env: RemoteEnv, action):
    return env.step(action)
