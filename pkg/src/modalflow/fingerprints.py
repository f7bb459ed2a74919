"""Deterministic modality-specific fingerprint embeddings.

Each modality maps to a fixed-dimension unit vector built from classical
signal statistics (character 3-grams, luma patch grids, spectral band
energies, static+motion halves).  Real learned encoders can be mounted
through the remote backend instead; these keep the registry hermetic.

Constant inputs (flat images, silence) produce a flagged all-zero vector
whose cosine against anything is defined as 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .media import Artifact, AudioBuf, ImageBuf, Modality, VideoBuf

DIMS = {
    Modality.TEXT: 256,
    Modality.IMAGE: 64,
    Modality.AUDIO: 32,
    Modality.VIDEO: 128,
}

_LUMA = np.array([0.299, 0.587, 0.114])


class EmptyContent(ValueError):
    pass


class TooSmall(ValueError):
    pass


class TooShort(ValueError):
    pass


class TooFewFrames(ValueError):
    pass


@dataclass(frozen=True)
class Embedding:
    modality: Modality
    values: np.ndarray  # float32, unit L2 norm or all-zero (degenerate)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float32)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape != (DIMS[self.modality],):
            raise ValueError(f"expected dim {DIMS[self.modality]}, got {v.shape}")

    @property
    def degenerate(self) -> bool:
        return not np.any(self.values)


def cosine(a: Embedding, b: Embedding) -> float:
    """Dot product of unit vectors; 0 if either side is degenerate."""
    if a.degenerate or b.degenerate:
        return 0.0
    return float(np.dot(a.values.astype(np.float64), b.values.astype(np.float64)))


def _finalize(modality: Modality, vec: np.ndarray) -> Embedding:
    """Unit-normalize in float64, or return the flagged zero vector."""
    vec = np.asarray(vec, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm < 1e-9:
        return Embedding(modality, np.zeros(DIMS[modality], dtype=np.float32))
    return Embedding(modality, (vec / norm).astype(np.float32))


def fnv1a32(data: bytes) -> int:
    h = 2166136261
    for byte in data:
        h ^= byte
        h = (h * 16777619) & 0xFFFFFFFF
    return h


def _normalize_text(text: str) -> str:
    return " ".join(text.lower().split())


def embed_text(text: str) -> Embedding:
    """Hashed character 3-gram profile, 256 buckets, 1+ln(tf) weights."""
    s = _normalize_text(text)
    if not s:
        raise EmptyContent("text empty after normalization")
    grams: dict[str, int] = {}
    if len(s) < 3:
        grams[s] = 1  # too short for 3-grams: hash the whole string
    else:
        for i in range(len(s) - 2):
            g = s[i : i + 3]
            grams[g] = grams.get(g, 0) + 1
    vec = np.zeros(DIMS[Modality.TEXT])
    for g, tf in grams.items():
        bucket = fnv1a32(g.encode("utf-8")) % DIMS[Modality.TEXT]
        vec[bucket] += 1.0 + np.log(tf)
    return _finalize(Modality.TEXT, vec)


def _grid64(luma: np.ndarray) -> np.ndarray:
    """8x8 grid of cell means over a (h, w) luma array, row-major."""
    h, w = luma.shape
    xs = [(i * w) // 8 for i in range(9)]
    ys = [(j * h) // 8 for j in range(9)]
    cells = np.empty(64)
    for j in range(8):
        for i in range(8):
            cells[j * 8 + i] = luma[ys[j] : ys[j + 1], xs[i] : xs[i + 1]].mean()
    return cells


def _luma_of(rgb: np.ndarray) -> np.ndarray:
    return rgb @ _LUMA


def embed_image(img: ImageBuf) -> Embedding:
    """Centered 8x8 luma patch means, unit-normalized."""
    if img.width < 8 or img.height < 8:
        raise TooSmall("image must be at least 8x8")
    cells = _grid64(_luma_of(img.to_array().astype(np.float64)))
    return _finalize(Modality.IMAGE, cells - cells.mean())


def embed_audio(audio: AudioBuf) -> Embedding:
    """Log band energies: 1024-sample frames, hop 512, 32 bands over bins 1-512."""
    x = audio.to_array().astype(np.float64)
    if x.size < 1024:
        raise TooShort("need at least 1024 samples")
    n_frames = (x.size - 1024) // 512 + 1
    feats = np.zeros(32)
    for k in range(n_frames):
        frame = x[k * 512 : k * 512 + 1024]
        mags = np.abs(np.fft.rfft(frame))  # bins 0..512
        bands = mags[1:513].reshape(32, 16).sum(axis=1)
        feats += np.log1p(bands)
    feats /= n_frames
    return _finalize(Modality.AUDIO, feats - feats.mean())


def embed_video(video: VideoBuf) -> Embedding:
    """Static half: mean frame embedding.  Motion half: grid of mean |frame delta|."""
    if len(video.frames) < 2:
        raise TooFewFrames("need at least 2 frames")
    if video.width < 8 or video.height < 8:
        raise TooSmall("frames must be at least 8x8")
    frame_arrays = [f.to_array().astype(np.float64) for f in video.frames]
    frame_vecs = [embed_image(f).values.astype(np.float64) for f in video.frames]
    static = np.mean(frame_vecs, axis=0)

    deltas = [np.abs(b - a) for a, b in zip(frame_arrays, frame_arrays[1:])]
    motion_img = np.mean(deltas, axis=0)
    cells = _grid64(_luma_of(motion_img))
    motion = cells - cells.mean()

    def unit_or_zero(v: np.ndarray) -> np.ndarray:
        norm = float(np.linalg.norm(v))
        return v / norm if norm >= 1e-9 else np.zeros_like(v)

    combined = np.concatenate([unit_or_zero(static), unit_or_zero(motion)])
    return _finalize(Modality.VIDEO, combined)


_EMBEDDERS = {
    Modality.TEXT: embed_text,
    Modality.IMAGE: embed_image,
    Modality.AUDIO: embed_audio,
    Modality.VIDEO: embed_video,
}


@dataclass(frozen=True)
class Embedder:
    """A fingerprint function bound to the single modality it accepts."""

    modality: Modality

    def __call__(self, payload) -> Embedding:
        return _EMBEDDERS[self.modality](payload)


def embedder_for(modality: Modality) -> Embedder:
    return Embedder(modality)


def embed_artifact(artifact: Artifact) -> Embedding:
    return _EMBEDDERS[artifact.modality](artifact.payload)
