"""Chat-completion backends.

Two wire dialects: `openai_chat_v1` speaks the OpenAI chat-completions JSON
shape over HTTP; `local_stub` is a deterministic in-process backend for
tests and dry runs. Retries use bounded exponential backoff, and a token
bucket enforces a per-backend request rate.
"""

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from ..errors import UpstreamError, ValidationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecodingParams:
    strategy: str = "greedy"  # greedy | sample
    max_new_tokens: int = 1024
    temperature: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.strategy not in ("greedy", "sample"):
            raise ValidationError(f"unknown decoding strategy {self.strategy!r}")
        if self.max_new_tokens <= 0:
            raise ValidationError("max_new_tokens must be positive")
        if self.strategy == "greedy" and self.temperature != 0.0:
            # greedy decoding ignores temperature; pin it so cache keys agree
            object.__setattr__(self, "temperature", 0.0)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "max_new_tokens": self.max_new_tokens,
            "temperature": self.temperature,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class BackendSpec:
    backend_id: str
    endpoint: str
    model_name: str
    auth_env: str = ""  # name of the env var holding the API key
    wire_dialect: str = "openai_chat_v1"

    def __post_init__(self):
        if self.wire_dialect not in ("openai_chat_v1", "local_stub"):
            raise ValidationError(f"unknown wire dialect {self.wire_dialect!r}")


class _TokenBucket:
    def __init__(self, rate_per_s: float, burst: int):
        self.rate = rate_per_s
        self.capacity = burst
        self.tokens = float(burst)
        self.updated = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self):
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1:
                    self.tokens -= 1
                    return
                wait = (1 - self.tokens) / self.rate
            time.sleep(wait)


class OpenAIChatBackend:
    """openai_chat_v1 dialect: POST {model, messages, temperature, max_tokens}."""

    def __init__(
        self,
        spec: BackendSpec,
        *,
        timeout_s: float = 120.0,
        max_retries: int = 3,
        rate_per_s: float = 10.0,
        burst: int = 10,
        log_requests: bool = False,
        client: httpx.Client | None = None,
    ):
        self.spec = spec
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self.log_requests = log_requests
        self._bucket = _TokenBucket(rate_per_s, burst)
        self._client = client or httpx.Client(timeout=timeout_s)

    def chat(self, system_text: str, user_text: str, params: DecodingParams) -> tuple[str, dict]:
        messages = []
        if system_text:
            messages.append({"role": "system", "content": system_text})
        messages.append({"role": "user", "content": user_text})
        body = {
            "model": self.spec.model_name,
            "messages": messages,
            "temperature": params.temperature,
            "max_tokens": params.max_new_tokens,
        }
        if params.seed is not None:
            body["seed"] = params.seed
        headers = {"Content-Type": "application/json"}
        if self.spec.auth_env:
            secret = os.environ.get(self.spec.auth_env)
            if not secret:
                raise ValidationError(
                    f"backend {self.spec.backend_id}: env var {self.spec.auth_env} is not set"
                )
            headers["Authorization"] = f"Bearer {secret}"
        if self.log_requests:
            log.info("request %s: %s", self.spec.endpoint, json.dumps(body, sort_keys=True))

        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            self._bucket.acquire()
            try:
                resp = self._client.post(self.spec.endpoint, json=body, headers=headers)
                if resp.status_code == 429 or resp.status_code >= 500:
                    raise UpstreamError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                resp.raise_for_status()
                raw = resp.json()
                try:
                    text = raw["choices"][0]["message"]["content"]
                except (KeyError, IndexError, TypeError) as exc:
                    raise UpstreamError(
                        f"malformed response from {self.spec.backend_id}: {json.dumps(raw)[:500]}"
                    ) from exc
                if not isinstance(text, str):
                    raise UpstreamError(f"non-text completion from {self.spec.backend_id}")
                return text, raw
            except (httpx.HTTPError, UpstreamError) as exc:
                last_error = exc
                if attempt < self.max_retries:
                    delay = min(30.0, 0.5 * 2**attempt)
                    log.warning(
                        "backend %s attempt %d failed (%s), retrying in %.1fs",
                        self.spec.backend_id,
                        attempt + 1,
                        exc,
                        delay,
                    )
                    time.sleep(delay)
        raise UpstreamError(
            f"backend {self.spec.backend_id} failed after {self.max_retries + 1} attempts: {last_error}"
        )


class StubBackend:
    """Deterministic offline backend.

    Endpoint forms:
      stub:echo          -> returns the user text
      stub:const:<path>  -> returns the contents of a text file for every call
    """

    def __init__(self, spec: BackendSpec):
        self.spec = spec
        parts = spec.endpoint.split(":", 2)
        if len(parts) < 2 or parts[0] != "stub":
            raise ValidationError(f"bad stub endpoint {spec.endpoint!r}")
        self.mode = parts[1]
        if self.mode == "echo":
            self._const = None
        elif self.mode == "const":
            if len(parts) != 3:
                raise ValidationError("stub:const requires a file path")
            self._const = Path(parts[2]).read_text(encoding="utf-8").strip()
        else:
            raise ValidationError(f"unknown stub mode {self.mode!r}")

    def chat(self, system_text: str, user_text: str, params: DecodingParams) -> tuple[str, dict]:
        text = user_text if self._const is None else self._const
        return text, {"stub": self.mode}


def build_backend(spec: BackendSpec, **kwargs):
    if spec.wire_dialect == "local_stub":
        return StubBackend(spec)
    return OpenAIChatBackend(spec, **kwargs)
