"""Chat-completion client used by the LLM-backed generator.

Speaks the common ``POST <base>/chat/completions`` protocol; the transport
is injectable so tests can run against a stub.  Every call is appended to a
JSONL audit log with timestamp, prompt, reply, and latency.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .syntax import InvgenError

DEFAULT_TIMEOUT_S = 120.0
MAX_RETRIES = 3


class TransportError(InvgenError):
    pass


class AuthError(InvgenError):
    pass


class MalformedReply(InvgenError):
    pass


Transport = Callable[[str, dict], str]
"""Takes (url, request body), returns the reply text content."""


@dataclass
class LLMConfig:
    base_url: str = ""
    model: str = ""
    api_key_env: str = "INVGEN_LLM_KEY"
    timeout_s: float = DEFAULT_TIMEOUT_S
    max_parallel: int = 4
    audit_path: Optional[str] = None
    transport: Optional[Transport] = None

    _sem: threading.Semaphore = field(init=False, repr=False, compare=False)
    _lock: threading.Lock = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._sem = threading.Semaphore(self.max_parallel)
        self._lock = threading.Lock()


def _http_transport(cfg: LLMConfig) -> Transport:
    import httpx

    key = os.environ.get(cfg.api_key_env, "")

    def send(url: str, body: dict) -> str:
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        resp = httpx.post(url, json=body, headers=headers,
                          timeout=cfg.timeout_s)
        if resp.status_code in (401, 403):
            raise AuthError(f"authentication failed ({resp.status_code})")
        if resp.status_code >= 400:
            raise TransportError(
                f"HTTP {resp.status_code}: {resp.text[:200]}")
        data = resp.json()
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise MalformedReply("reply carries no message content") from None

    return send


def llm_complete(prompt: str, cfg: LLMConfig) -> str:
    """Single-turn completion with bounded exponential-backoff retries."""
    transport = cfg.transport or _http_transport(cfg)
    url = cfg.base_url.rstrip("/") + "/chat/completions"
    body = {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
    }
    last_error: Optional[Exception] = None
    for attempt in range(MAX_RETRIES):
        start = time.time()
        try:
            with cfg._sem:
                reply = transport(url, body)
            _audit(cfg, prompt, reply, time.time() - start, attempt)
            return reply
        except AuthError:
            raise
        except (TransportError, OSError) as exc:
            last_error = exc
            _audit(cfg, prompt, f"<error: {exc}>", time.time() - start,
                   attempt)
            if attempt < MAX_RETRIES - 1:
                time.sleep(min(2.0 ** attempt * 0.5, 8.0))
    raise TransportError(f"transport failed after {MAX_RETRIES} attempts: "
                         f"{last_error}")


def _audit(cfg: LLMConfig, prompt: str, reply: str, latency: float,
           attempt: int) -> None:
    if cfg.audit_path is None:
        return
    record = {
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "model": cfg.model,
        "attempt": attempt,
        "latency_s": round(latency, 3),
        "prompt": prompt,
        "reply": reply,
    }
    with cfg._lock:
        with open(cfg.audit_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")


def extract_formula_text(reply: str) -> str:
    """Pull the invariant out of an LLM reply.

    Preferred: the last fenced code block.  Fallback: the last line that
    survives a formula parse upstream (callers try candidates in order).
    """
    import re

    fences = re.findall(r"```[a-zA-Z]*\n(.*?)```", reply, re.S)
    if fences:
        return fences[-1].strip()
    lines = [ln.strip() for ln in reply.strip().splitlines() if ln.strip()]
    if not lines:
        raise MalformedReply("empty reply")
    return lines[-1]
