"""Chat-completions client with bounded retries.

Speaks the chat-completions wire shape: POST ``<base_url>/chat/completions``
with a bearer key from ``OSSA_API_KEY``, messages carrying text and
optional image parts, and the reply text at ``choices[0].message.content``.
Transient failures (429, 5xx, transport errors) retry with exponential
backoff up to ``max_attempts``; every response records latency, token
usage, and the attempt count.
"""

from __future__ import annotations

import base64
import logging
import os
import threading
import time
from dataclasses import dataclass, field

import httpx

API_KEY_ENV = "OSSA_API_KEY"

logger = logging.getLogger(__name__)


class ChatError(RuntimeError):
    """Base class for chat transport failures."""


class AuthError(ChatError):
    """Missing or rejected API key."""


class RateLimited(ChatError):
    """Rate limit still in effect after all retries."""


class Timeout(ChatError):
    """Request exceeded the configured timeout after all retries."""


class TransportError(ChatError):
    """Connection failure, server error, or malformed response."""


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[dict, ...]
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout: float = 30.0


@dataclass(frozen=True)
class ChatResponse:
    text: str
    usage: dict = field(default_factory=dict)
    latency_s: float = 0.0
    attempt_count: int = 1


def text_part(text: str) -> dict:
    return {"type": "text", "text": text}


def image_part(image: bytes, media_type: str) -> dict:
    encoded = base64.b64encode(image).decode("ascii")
    return {"type": "image_url", "image_url": {"url": f"data:{media_type};base64,{encoded}"}}


def user_message(*parts: dict) -> dict:
    return {"role": "user", "content": list(parts)}


_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class ChatModelClient:
    """Thread-safe client with an in-flight request cap."""

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        max_in_flight: int = 4,
    ):
        self.base_url = base_url.rstrip("/")
        self._api_key = api_key
        self.max_attempts = max(1, max_attempts)
        self.backoff_base = backoff_base
        self._gate = threading.Semaphore(max_in_flight)
        self._http = httpx.Client()

    def close(self) -> None:
        self._http.close()

    def _key(self) -> str:
        key = self._api_key or os.environ.get(API_KEY_ENV)
        if not key:
            raise AuthError(f"no API key: set {API_KEY_ENV} in the environment")
        return key

    def query_chat_model(self, request: ChatRequest) -> ChatResponse:
        """Send one chat request; retries idempotently on transient failures."""
        key = self._key()
        body = {
            "model": request.model,
            "messages": list(request.messages),
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Authorization": f"Bearer {key}"}
        url = f"{self.base_url}/chat/completions"
        last_error: ChatError | None = None
        with self._gate:
            for attempt in range(1, self.max_attempts + 1):
                started = time.perf_counter()
                try:
                    response = self._http.post(
                        url, json=body, headers=headers, timeout=request.timeout
                    )
                except httpx.TimeoutException as exc:
                    last_error = Timeout(f"request timed out after {request.timeout}s")
                    last_error.__cause__ = exc
                except httpx.HTTPError as exc:
                    last_error = TransportError(str(exc))
                    last_error.__cause__ = exc
                else:
                    latency = time.perf_counter() - started
                    if response.status_code == 200:
                        return self._parse(response, latency, attempt)
                    if response.status_code in (401, 403):
                        raise AuthError(f"API key rejected (status {response.status_code})")
                    if response.status_code == 429:
                        last_error = RateLimited("rate limited (status 429)")
                    elif response.status_code in _RETRYABLE_STATUS:
                        last_error = TransportError(f"server error (status {response.status_code})")
                    else:
                        raise TransportError(
                            f"unexpected status {response.status_code}: {response.text[:200]}"
                        )
                if attempt < self.max_attempts:
                    delay = self.backoff_base * (2 ** (attempt - 1))
                    logger.debug("retrying chat call in %.2fs (attempt %d)", delay, attempt)
                    time.sleep(delay)
        assert last_error is not None
        raise last_error

    @staticmethod
    def _parse(response: httpx.Response, latency: float, attempt: int) -> ChatResponse:
        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion payload: {exc}") from exc
        if not isinstance(text, str):
            raise TransportError("completion content is not text")
        usage = payload.get("usage") or {}
        return ChatResponse(
            text=text,
            usage=dict(usage),
            latency_s=latency,
            attempt_count=attempt,
        )
