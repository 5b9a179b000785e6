"""Transcription-provider boundary.

Handwriting recognition itself is out of scope; this module defines the
contract a provider must meet and ships a passthrough adapter that accepts
UTF-8 text blobs directly, which is what every offline test and the
synthetic corpus use.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

from .errors import ProviderUnavailable, UnreadableInput

PASSTHROUGH = "PASSTHROUGH"
REMOTE = "REMOTE"

ENV_TRANSCRIBE_URL = "GRADEKIT_TRANSCRIBE_URL"


@dataclass(frozen=True)
class TranscriptionResult:
    text: str
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


def passthrough_transcribe(blob: bytes | str) -> TranscriptionResult:
    """Identity adapter: decode the blob as UTF-8 and trust it fully."""
    if isinstance(blob, bytes):
        try:
            text = blob.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnreadableInput(f"blob is not valid UTF-8: {exc}") from exc
    else:
        text = blob
    if not text.strip():
        raise UnreadableInput("blob is empty")
    return TranscriptionResult(text=text, confidence=1.0)


class RemoteTranscriber:
    """Client for a hosted recognition service.

    ``transport`` takes the raw blob and returns {"text": ..., "confidence": ...};
    transport failures surface as ProviderUnavailable, junk responses as
    UnreadableInput.
    """

    def __init__(self, transport: Callable[[bytes], dict]):
        self._transport = transport

    def transcribe(self, blob: bytes | str) -> TranscriptionResult:
        if isinstance(blob, str):
            blob = blob.encode("utf-8")
        if not blob:
            raise UnreadableInput("blob is empty")
        try:
            raw = self._transport(blob)
        except Exception as exc:
            raise ProviderUnavailable(f"transcription provider failed: {exc}") from exc
        if not isinstance(raw, dict) or "text" not in raw or "confidence" not in raw:
            raise UnreadableInput(f"provider response malformed: {raw!r}")
        text = raw["text"]
        confidence = raw["confidence"]
        if not isinstance(text, str) or not text.strip():
            raise UnreadableInput("provider returned empty text")
        if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
            raise UnreadableInput("provider confidence is not numeric")
        if not 0.0 <= float(confidence) <= 1.0:
            raise UnreadableInput(f"provider confidence {confidence} outside [0, 1]")
        return TranscriptionResult(text=text, confidence=float(confidence))


def http_transcription_transport(url: str, timeout: float = 60.0) -> Callable[[bytes], dict]:
    import httpx

    def transport(blob: bytes) -> dict:
        response = httpx.post(
            url, content=blob, headers={"content-type": "application/octet-stream"},
            timeout=timeout,
        )
        response.raise_for_status()
        return response.json()

    return transport


def make_transcriber() -> Callable[[bytes | str], TranscriptionResult]:
    """Remote when GRADEKIT_TRANSCRIBE_URL is set, passthrough otherwise."""
    url = os.environ.get(ENV_TRANSCRIBE_URL)
    if url:
        return RemoteTranscriber(http_transcription_transport(url)).transcribe
    return passthrough_transcribe
