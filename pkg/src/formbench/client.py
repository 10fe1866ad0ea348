"""Minimal OpenAI-compatible chat-completions client with retries."""

from __future__ import annotations

import os
import random
import time
from dataclasses import dataclass, field

import httpx


class ClientError(RuntimeError):
    pass


_RETRYABLE_STATUS = {408, 409, 429, 500, 502, 503, 504}


@dataclass
class OpenAIChatClient:
    """POSTs to {endpoint}/chat/completions (or to endpoint verbatim when
    it already names the route). The API key is read from the environment
    at call time so configs stay secret-free.
    """

    endpoint: str
    model: str
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 5
    backoff_base: float = 1.0
    transport: httpx.BaseTransport | None = field(default=None, repr=False)

    def _url(self) -> str:
        base = self.endpoint.rstrip("/")
        if base.endswith("/chat/completions"):
            return base
        return base + "/chat/completions"

    def complete(
        self,
        messages: list[dict],
        response_format: str | None = "json_object",
    ) -> str:
        payload: dict = {
            "model": self.model,
            "messages": messages,
            "temperature": self.temperature,
        }
        if response_format:
            payload["response_format"] = {"type": response_format}
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last_error: str = "no attempts made"
        for attempt in range(self.max_retries):
            try:
                with httpx.Client(
                    timeout=self.timeout, transport=self.transport
                ) as client:
                    response = client.post(
                        self._url(), json=payload, headers=headers
                    )
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
            else:
                if response.status_code == 200:
                    return self._extract_content(response)
                last_error = f"HTTP {response.status_code}: {response.text[:200]}"
                if response.status_code not in _RETRYABLE_STATUS:
                    raise ClientError(last_error)
            if attempt < self.max_retries - 1:
                delay = self.backoff_base * (2 ** attempt)
                time.sleep(delay + random.uniform(0, delay / 2))
        raise ClientError(
            f"request failed after {self.max_retries} attempts; last: {last_error}"
        )

    @staticmethod
    def _extract_content(response: httpx.Response) -> str:
        try:
            body = response.json()
            content = body["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise ClientError(f"malformed completion response: {exc}") from exc
        if isinstance(content, list):  # content-parts style replies
            content = "".join(
                part.get("text", "") for part in content if isinstance(part, dict)
            )
        if not isinstance(content, str):
            raise ClientError("completion content is not text")
        return content
