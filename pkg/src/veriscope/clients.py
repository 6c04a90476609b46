"""HTTP clients for the two external model services.

Wire contracts (JSON over POST):
  embedding  : {"texts": [str, ...]} -> {"embeddings": [[float, ...], ...], "dim": int}
  generation : {"prompt": str, "max_tokens": int, "temperature": float} -> {"text": str}

Both clients retry transport failures and 5xx responses with exponential
backoff, honor a millisecond timeout, and keep thread-safe attempt/retry
counters. Non-200 status outside 5xx and any malformed body are contract
violations and are not retried.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

import requests

from veriscope.embedding import Embedding
from veriscope.errors import ContractViolation, ProviderUnavailable, UsageError


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str
    timeout_ms: int = 30000
    max_retries: int = 2
    backoff_base_ms: int = 250
    bearer_token: str | None = None

    def __post_init__(self):
        if not self.endpoint:
            raise UsageError("endpoint required")
        if self.timeout_ms <= 0:
            raise UsageError("timeout_ms must be > 0")
        if not 0 <= self.max_retries <= 10:
            raise UsageError("max_retries must be in [0, 10]")
        if self.backoff_base_ms < 0:
            raise UsageError("backoff_base_ms must be >= 0")


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_tokens: int = 256
    temperature: float = 0.0

    def __post_init__(self):
        if not self.prompt:
            raise UsageError("prompt must be non-empty")
        if self.max_tokens < 1:
            raise UsageError("max_tokens must be >= 1")
        if self.temperature < 0:
            raise UsageError("temperature must be >= 0")


class ClientMetrics:
    """Attempt/retry/failure counters, safe to bump from concurrent calls."""

    def __init__(self):
        self._lock = threading.Lock()
        self.attempts = 0
        self.retries = 0
        self.failures = 0

    def record_attempt(self):
        with self._lock:
            self.attempts += 1

    def record_retry(self):
        with self._lock:
            self.retries += 1

    def record_failure(self):
        with self._lock:
            self.failures += 1

    def snapshot(self) -> dict:
        with self._lock:
            return {"attempts": self.attempts, "retries": self.retries, "failures": self.failures}


class _HttpClient:
    def __init__(self, cfg: ProviderConfig):
        self.cfg = cfg
        self.metrics = ClientMetrics()
        self._session = requests.Session()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.cfg.bearer_token:
            headers["Authorization"] = f"Bearer {self.cfg.bearer_token}"
        return headers

    def _post_json(self, payload: dict) -> dict:
        last_exc: Exception | None = None
        for attempt in range(self.cfg.max_retries + 1):
            self.metrics.record_attempt()
            try:
                resp = self._session.post(
                    self.cfg.endpoint,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.cfg.timeout_ms / 1000.0,
                )
            except requests.RequestException as exc:
                last_exc = exc
            else:
                if resp.status_code == 200:
                    try:
                        body = resp.json()
                    except ValueError as exc:
                        self.metrics.record_failure()
                        raise ContractViolation(f"malformed JSON from {self.cfg.endpoint}") from exc
                    if not isinstance(body, dict):
                        self.metrics.record_failure()
                        raise ContractViolation("response body must be a JSON object")
                    return body
                if resp.status_code < 500:
                    self.metrics.record_failure()
                    raise ContractViolation(f"HTTP {resp.status_code} from {self.cfg.endpoint}")
                last_exc = ProviderUnavailable(f"HTTP {resp.status_code}")
            if attempt < self.cfg.max_retries:
                self.metrics.record_retry()
                time.sleep(self.cfg.backoff_base_ms / 1000.0 * (2**attempt))
        self.metrics.record_failure()
        raise ProviderUnavailable(
            f"{self.cfg.endpoint} unavailable after {self.cfg.max_retries + 1} attempt(s)"
        ) from last_exc


class EmbeddingClient(_HttpClient):
    def embed(self, texts: list[str]) -> list[Embedding]:
        """Embed a batch; output index i corresponds to input index i."""
        if not texts:
            raise UsageError("texts must be non-empty")
        body = self._post_json({"texts": list(texts)})
        try:
            rows = body["embeddings"]
            dim = body["dim"]
        except KeyError as exc:
            raise ContractViolation(f"embedding response missing key {exc}") from exc
        if not isinstance(dim, int) or dim < 1:
            raise ContractViolation(f"bad dim in response: {dim!r}")
        if not isinstance(rows, list) or len(rows) != len(texts):
            raise ContractViolation(f"expected {len(texts)} embeddings, got {len(rows) if isinstance(rows, list) else type(rows).__name__}")
        out = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != dim:
                raise ContractViolation(f"embedding {i} has dim {len(row) if isinstance(row, list) else '?'}, expected {dim}")
            try:
                out.append(Embedding.from_values(row))
            except (UsageError, TypeError, ValueError) as exc:
                raise ContractViolation(f"embedding {i} is not a finite vector") from exc
        return out


class GenerationClient(_HttpClient):
    def generate(self, req: GenerationRequest) -> str:
        """Request a completion; the caller decides what an empty string means."""
        body = self._post_json(
            {"prompt": req.prompt, "max_tokens": req.max_tokens, "temperature": req.temperature}
        )
        text = body.get("text")
        if not isinstance(text, str):
            raise ContractViolation("generation response must carry a string 'text' field")
        return text


def embed_remote(texts: list[str], cfg: ProviderConfig) -> list[Embedding]:
    return EmbeddingClient(cfg).embed(texts)


def generate_text(req: GenerationRequest, cfg: ProviderConfig) -> str:
    return GenerationClient(cfg).generate(req)
