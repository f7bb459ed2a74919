"""Wire contract for real model services and the artifact JSON encoding.

Request:  {"stage_kind", "params", "inputs": [{"modality", "encoding", "data"}]}
Response: {"status": "ok"|"error", "output": {...}, "message"?}

Text travels as UTF-8; image/audio/video travel as base64 of their canonical
byte forms (PPM / WAV / frame archive).  The service API reuses the same
artifact encoding so there is exactly one format everywhere.
"""
from __future__ import annotations

import base64
import binascii

import httpx

from .flows import SIGNATURES, StageKind
from .media import (
    Artifact,
    MediaFormatError,
    Modality,
    canonical_bytes,
    parse_image_ppm,
    parse_video_archive,
    parse_wav,
)


class TransportError(Exception):
    pass


class RemoteError(Exception):
    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class BadResponse(Exception):
    pass


def encode_payload(payload) -> dict:
    if isinstance(payload, str):
        return {"modality": "text", "encoding": "utf8", "data": payload}
    data = base64.b64encode(canonical_bytes(payload)).decode("ascii")
    from .media import modality_of

    return {"modality": modality_of(payload).value, "encoding": "base64", "data": data}


def encode_artifact(artifact: Artifact) -> dict:
    return encode_payload(artifact.payload)


_DECODERS = {
    Modality.IMAGE: parse_image_ppm,
    Modality.AUDIO: parse_wav,
    Modality.VIDEO: parse_video_archive,
}


def decode_payload(obj: dict):
    """Inverse of encode_payload; raises BadResponse on any malformation."""
    if not isinstance(obj, dict):
        raise BadResponse("payload must be an object")
    try:
        modality = Modality(obj.get("modality"))
    except ValueError:
        raise BadResponse(f"unknown modality {obj.get('modality')!r}") from None
    encoding = obj.get("encoding")
    data = obj.get("data")
    if not isinstance(data, str):
        raise BadResponse("payload data must be a string")
    if modality is Modality.TEXT:
        if encoding != "utf8":
            raise BadResponse(f"text must be utf8-encoded, got {encoding!r}")
        return data
    if encoding != "base64":
        raise BadResponse(f"{modality.value} must be base64-encoded, got {encoding!r}")
    try:
        raw = base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise BadResponse(f"invalid base64: {exc}") from exc
    try:
        return _DECODERS[modality](raw)
    except MediaFormatError as exc:
        raise BadResponse(f"bad {modality.value} payload: {exc}") from exc


def remote_invoke(
    kind: StageKind,
    inputs: list[Artifact],
    params: dict,
    endpoint: str,
    timeout: float = 30.0,
) -> Artifact:
    """Call a remote stage implementation and wrap its output as an Artifact."""
    request = {
        "stage_kind": kind.value,
        "params": dict(params),
        "inputs": [encode_artifact(a) for a in inputs],
    }
    try:
        response = httpx.post(endpoint, json=request, timeout=timeout)
    except httpx.HTTPError as exc:
        raise TransportError(str(exc)) from exc
    try:
        body = response.json()
    except ValueError as exc:
        raise BadResponse(f"non-JSON response: {exc}") from exc
    if not isinstance(body, dict):
        raise BadResponse("response must be an object")
    status = body.get("status")
    if status == "error":
        raise RemoteError(body.get("code", response.status_code), body.get("message", ""))
    if status != "ok":
        raise BadResponse(f"unknown status {status!r}")
    payload = decode_payload(body.get("output"))
    artifact = Artifact.new(payload, parents=tuple(a.id for a in inputs), stage_kind=kind.value)
    if artifact.modality != SIGNATURES[kind].output:
        raise BadResponse(
            f"{kind.value} must output {SIGNATURES[kind].output.value}, "
            f"got {artifact.modality.value}"
        )
    return artifact
