"""Backend registry: binds stage kinds to mock implementations or remote endpoints.

A backend implementation takes (inputs by port, params) and returns a raw
payload; the engine wraps it into an artifact with provenance.  The "mock"
backend covers every stage kind; "remote:{name}" backends proxy the wire
protocol to a configured endpoint.
"""
from __future__ import annotations

from . import mocks
from .flows import SIGNATURES, StageKind
from .media import Artifact
from .remote import remote_invoke


class UnknownBackend(Exception):
    pass


def _int(params, key, default):
    return int(params.get(key, default))


def _mock_impls() -> dict[StageKind, object]:
    return {
        StageKind.TEXT_GEN: lambda ins, p: mocks.mock_text_gen(
            ins["in"].payload, seed=_int(p, "seed", 0), length=_int(p, "length", 200)
        ),
        StageKind.CHAT: lambda ins, p: mocks.mock_chat(
            ins["in"].payload, seed=_int(p, "seed", 0), length=_int(p, "length", 120)
        ),
        StageKind.TEXT_TO_IMAGE: lambda ins, p: mocks.mock_text_to_image(
            ins["in"].payload,
            seed=_int(p, "seed", 0),
            width=_int(p, "width", 64),
            height=_int(p, "height", 64),
        ),
        StageKind.IMAGE_TO_TEXT: lambda ins, p: mocks.mock_image_to_text(ins["in"].payload),
        StageKind.STYLE_TRANSFER: lambda ins, p: mocks.mock_style_transfer(
            ins["content"].payload,
            ins["style"].payload,
            strength=float(p.get("strength", 0.5)),
        ),
        StageKind.IMAGE_EDIT: lambda ins, p: mocks.mock_image_edit(
            ins["in"].payload, brightness=_int(p, "brightness", 16)
        ),
        StageKind.TTS: lambda ins, p: mocks.mock_tts(ins["in"].payload),
        StageKind.ASR: lambda ins, p: mocks.mock_asr(ins["in"].payload),
        StageKind.TEXT_TO_VIDEO: lambda ins, p: mocks.mock_text_to_video(
            ins["in"].payload,
            seed=_int(p, "seed", 0),
            n_frames=_int(p, "n_frames", 16),
            width=_int(p, "width", 64),
            height=_int(p, "height", 64),
        ),
        StageKind.VIDEO_SUMMARY: lambda ins, p: mocks.mock_video_summary(ins["in"].payload),
        StageKind.TRANSLATE: lambda ins, p: mocks.mock_translate(
            ins["in"].payload, direction=str(p.get("direction", "zh-en"))
        ),
        StageKind.PROMPT_EXPAND: lambda ins, p: mocks.prompt_expand(
            ins["in"].payload, k=_int(p, "k", 3)
        ),
    }


class _RemoteBackend:
    def __init__(self, endpoint: str):
        self.endpoint = endpoint

    def impl(self, kind: StageKind):
        def call(ins: dict[str, Artifact], params: dict):
            ordered = [ins[port] for port, _ in SIGNATURES[kind].inputs]
            return remote_invoke(kind, ordered, params, self.endpoint).payload

        return call


class BackendRegistry:
    """Maps backend name -> per-kind implementation; "mock" is always complete."""

    def __init__(self, endpoints: dict[str, str] | None = None):
        self._mocks = _mock_impls()
        assert set(self._mocks) == set(StageKind)
        self._endpoints = dict(endpoints or {})

    def resolve(self, backend: str, kind: StageKind):
        if backend == "mock":
            return self._mocks[kind]
        if backend.startswith("remote:"):
            name = backend.split(":", 1)[1]
            if name not in self._endpoints:
                raise UnknownBackend(f"no endpoint configured for {backend!r}")
            return _RemoteBackend(self._endpoints[name]).impl(kind)
        raise UnknownBackend(backend)


def default_registry(endpoints: dict[str, str] | None = None) -> BackendRegistry:
    return BackendRegistry(endpoints=endpoints)
