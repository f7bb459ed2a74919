"""Canonical artifact model and bit-exact codecs for the four modalities.

Payloads are immutable values: text is ``str``, images are raw RGB byte
buffers, audio is 16-bit mono PCM at 16 kHz, video is a frame list at a
fixed 8 fps.  Each modality has exactly one canonical byte form (PPM, WAV,
frame archive) so content hashing and wire transport are unambiguous.
"""
from __future__ import annotations

import hashlib
import json
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

AUDIO_SAMPLE_RATE = 16000
VIDEO_FPS = 8


class MediaFormatError(ValueError):
    """Base class for codec failures."""


class BadMagic(MediaFormatError):
    pass


class BadHeader(MediaFormatError):
    pass


class TruncatedPayload(MediaFormatError):
    pass


class UnsupportedFormat(MediaFormatError):
    pass


class Modality(str, Enum):
    TEXT = "text"
    IMAGE = "image"
    AUDIO = "audio"
    VIDEO = "video"

    @property
    def tag(self) -> int:
        """Stable numeric tag used in binary store headers."""
        return _MODALITY_TAGS[self]


_MODALITY_TAGS = {
    Modality.TEXT: 0,
    Modality.IMAGE: 1,
    Modality.AUDIO: 2,
    Modality.VIDEO: 3,
}

MODALITY_BY_TAG = {v: k for k, v in _MODALITY_TAGS.items()}


@dataclass(frozen=True)
class ImageBuf:
    """Row-major RGB image, 8 bits per channel."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if len(self.pixels) != self.width * self.height * 3:
            raise ValueError(
                f"pixel buffer length {len(self.pixels)} != {self.width}x{self.height}x3"
            )

    def to_array(self) -> np.ndarray:
        """(height, width, 3) uint8 view of the pixel data."""
        arr = np.frombuffer(self.pixels, dtype=np.uint8)
        return arr.reshape(self.height, self.width, 3)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageBuf":
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError("expected (h, w, 3) uint8 array")
        h, w = arr.shape[:2]
        return cls(width=w, height=h, pixels=arr.tobytes())


@dataclass(frozen=True)
class AudioBuf:
    """Mono 16-bit PCM audio; samples are little-endian int16 bytes."""

    samples: bytes
    sample_rate: int = AUDIO_SAMPLE_RATE

    def __post_init__(self):
        if self.sample_rate != AUDIO_SAMPLE_RATE:
            raise ValueError(f"sample_rate must be {AUDIO_SAMPLE_RATE}")
        if len(self.samples) % 2 != 0:
            raise ValueError("sample byte length must be even (int16 PCM)")

    @property
    def n_samples(self) -> int:
        return len(self.samples) // 2

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.samples, dtype="<i2")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "AudioBuf":
        arr = np.asarray(arr)
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("expected integer sample array")
        return cls(samples=arr.astype("<i2").tobytes())


@dataclass(frozen=True)
class VideoBuf:
    """Nonempty frame sequence at a fixed frame rate."""

    frames: tuple[ImageBuf, ...]
    fps: int = VIDEO_FPS

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise ValueError("video needs at least one frame")
        w, h = self.frames[0].width, self.frames[0].height
        for f in self.frames:
            if f.width != w or f.height != h:
                raise ValueError("all frames must share dimensions")
        if not 0 < self.fps < 256:
            raise ValueError("fps must fit in one byte")

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height


_PAYLOAD_TYPES = {
    Modality.TEXT: str,
    Modality.IMAGE: ImageBuf,
    Modality.AUDIO: AudioBuf,
    Modality.VIDEO: VideoBuf,
}


def modality_of(payload) -> Modality:
    for modality, tp in _PAYLOAD_TYPES.items():
        if isinstance(payload, tp):
            return modality
    raise TypeError(f"unsupported payload type {type(payload)!r}")


@dataclass(frozen=True)
class Artifact:
    """One typed payload plus its provenance parent links."""

    id: str
    modality: Modality
    payload: object
    parent_ids: tuple[str, ...] = ()
    created_at: int = field(default_factory=lambda: int(time.time()))
    stage_kind: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "parent_ids", tuple(self.parent_ids))
        if self.id in self.parent_ids:
            raise ValueError("artifact cannot be its own parent")
        if not isinstance(self.payload, _PAYLOAD_TYPES[self.modality]):
            raise ValueError(
                f"payload type {type(self.payload).__name__} does not match {self.modality.value}"
            )

    @classmethod
    def new(cls, payload, parents: tuple[str, ...] = (), stage_kind: str | None = None) -> "Artifact":
        return cls(
            id=uuid.uuid4().hex,
            modality=modality_of(payload),
            payload=payload,
            parent_ids=tuple(parents),
            stage_kind=stage_kind,
        )


# ---------------------------------------------------------------------------
# PPM (P6) codec


def _read_ppm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next header token, skipping whitespace and ``#`` comments."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise BadHeader("unexpected end of header")
    return data[start:pos], pos


def parse_image_ppm(data: bytes) -> ImageBuf:
    """Decode a binary PPM (magic P6, maxval 255)."""
    if not data.startswith(b"P6"):
        raise BadMagic("not a P6 PPM")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_ppm_token(data, pos)
        if not tok.isdigit():
            raise BadHeader(f"non-numeric header field {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise BadHeader("dimensions must be positive")
    if maxval != 255:
        raise BadHeader(f"unsupported maxval {maxval}")
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise BadHeader("missing separator after maxval")
    pos += 1
    need = width * height * 3
    raster = data[pos : pos + need]
    if len(raster) < need:
        raise TruncatedPayload(f"raster has {len(raster)} of {need} bytes")
    return ImageBuf(width=width, height=height, pixels=raster)


def write_image_ppm(img: ImageBuf) -> bytes:
    return b"P6\n%d %d\n255\n" % (img.width, img.height) + img.pixels


# ---------------------------------------------------------------------------
# WAV codec (PCM, mono, 16-bit, 16 kHz only)


def parse_wav(data: bytes) -> AudioBuf:
    if len(data) < 12:
        raise TruncatedPayload("shorter than a RIFF header")
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise BadMagic("not a RIFF/WAVE file")
    pos = 12
    fmt = None
    samples = None
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        size = int.from_bytes(data[pos + 4 : pos + 8], "little")
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise TruncatedPayload(f"chunk {chunk_id!r} truncated")
        if chunk_id == b"fmt ":
            if size < 16:
                raise BadHeader("fmt chunk too small")
            fmt = {
                "format": int.from_bytes(body[0:2], "little"),
                "channels": int.from_bytes(body[2:4], "little"),
                "rate": int.from_bytes(body[4:8], "little"),
                "bits": int.from_bytes(body[14:16], "little"),
            }
        elif chunk_id == b"data":
            samples = body
        pos += 8 + size + (size % 2)  # chunks are word-aligned
    if fmt is None or samples is None:
        raise BadHeader("missing fmt or data chunk")
    if (
        fmt["format"] != 1
        or fmt["channels"] != 1
        or fmt["rate"] != AUDIO_SAMPLE_RATE
        or fmt["bits"] != 16
    ):
        raise UnsupportedFormat(
            f"need PCM mono 16-bit {AUDIO_SAMPLE_RATE} Hz, got {fmt}"
        )
    if len(samples) % 2 != 0:
        raise TruncatedPayload("odd data chunk length")
    return AudioBuf(samples=samples)


def write_wav(audio: AudioBuf) -> bytes:
    """Minimal canonical 44-byte-header WAV file."""
    n = len(audio.samples)
    rate = audio.sample_rate
    header = b"".join(
        [
            b"RIFF",
            (36 + n).to_bytes(4, "little"),
            b"WAVE",
            b"fmt ",
            (16).to_bytes(4, "little"),
            (1).to_bytes(2, "little"),  # PCM
            (1).to_bytes(2, "little"),  # mono
            rate.to_bytes(4, "little"),
            (rate * 2).to_bytes(4, "little"),  # byte rate
            (2).to_bytes(2, "little"),  # block align
            (16).to_bytes(2, "little"),  # bits per sample
            b"data",
            n.to_bytes(4, "little"),
        ]
    )
    return header + audio.samples


# ---------------------------------------------------------------------------
# Video: canonical archive (wire/hash form) and on-disk manifest directory


def write_video_archive(video: VideoBuf) -> bytes:
    """Concatenated canonical frame PPMs followed by a single fps byte."""
    return b"".join(write_image_ppm(f) for f in video.frames) + bytes([video.fps])


def parse_video_archive(data: bytes) -> VideoBuf:
    frames = []
    pos = 0
    while pos < len(data) - 1:
        chunk = data[pos:]
        frame = parse_image_ppm(chunk)
        frames.append(frame)
        pos += len(write_image_ppm(frame))
    if not frames:
        raise TruncatedPayload("no frames in archive")
    if pos != len(data) - 1:
        raise TruncatedPayload("trailing bytes are not a single fps byte")
    return VideoBuf(frames=tuple(frames), fps=data[-1])


def write_video_dir(video: VideoBuf, path: str | Path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(video.frames):
        (path / f"frame_{i:05d}.ppm").write_bytes(write_image_ppm(frame))
    meta = {"fps": video.fps, "frame_count": len(video.frames)}
    (path / "meta.json").write_text(json.dumps(meta))


def read_video_dir(path: str | Path) -> VideoBuf:
    path = Path(path)
    meta = json.loads((path / "meta.json").read_text())
    frames = []
    for i in range(int(meta["frame_count"])):
        frames.append(parse_image_ppm((path / f"frame_{i:05d}.ppm").read_bytes()))
    return VideoBuf(frames=tuple(frames), fps=int(meta["fps"]))


# ---------------------------------------------------------------------------
# Content hashing


def canonical_bytes(payload) -> bytes:
    """Canonical byte form used for hashing and wire transport."""
    if isinstance(payload, str):
        return payload.encode("utf-8")
    if isinstance(payload, ImageBuf):
        return write_image_ppm(payload)
    if isinstance(payload, AudioBuf):
        return write_wav(payload)
    if isinstance(payload, VideoBuf):
        return write_video_archive(payload)
    raise TypeError(f"unsupported payload type {type(payload)!r}")


def content_hash(payload) -> str:
    """SHA-256 of the canonical byte form, lowercase hex."""
    if isinstance(payload, Artifact):
        payload = payload.payload
    return hashlib.sha256(canonical_bytes(payload)).hexdigest()
