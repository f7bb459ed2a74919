"""Deterministic desk-scale stand-ins for every pipeline stage kind.

Real generators run behind the remote wire protocol; these mocks are pure,
seeded functions that preserve the flow semantics (modality signatures,
parameter handling, provenance) so everything is testable offline.

Conventions stated once here because no upstream source fixes them:
tie-breaks are always lowest-index / lexicographic; captions pick the
dominant channel in R>G>B order; ASR resolves equal responses to 'a'.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib.resources import files

import numpy as np

from . import charlm
from .fingerprints import cosine, embed_image, embed_text
from .media import AUDIO_SAMPLE_RATE, VIDEO_FPS, AudioBuf, ImageBuf, VideoBuf


class BadDimensions(ValueError):
    pass


class BadFrameCount(ValueError):
    pass


class TextTooLong(ValueError):
    pass


class BadFrameLength(ValueError):
    pass


class EmptyKb(ValueError):
    pass


def _data_text(name: str) -> str:
    return files("modalflow").joinpath(f"data/{name}").read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def default_lm() -> charlm.CharLm:
    return charlm.lm_train(_data_text("corpus.txt"))


# ---------------------------------------------------------------------------
# Text


def mock_text_gen(prompt: str, seed: int = 0, length: int = 200) -> str:
    """Extend the prompt with sampled continuation characters."""
    return charlm.lm_generate(default_lm(), prompt, n=length, seed=seed)


def mock_chat(prompt: str, seed: int = 0, length: int = 120) -> str:
    """Reply text only (no prompt echo)."""
    out = charlm.lm_generate(default_lm(), prompt + " ", n=length, seed=seed)
    return out[len(prompt) + 1 :]


# ---------------------------------------------------------------------------
# Images: trigonometric fields parameterized by SHA-256(prompt || seed)


def _field_params(prompt: str, seed: int):
    digest = hashlib.sha256(f"{prompt}\x00{seed}".encode("utf-8")).digest()
    chans = []
    for c in range(3):
        chans.append(
            {
                "fx": 1 + digest[4 * c] % 2,
                "fy": 1 + digest[4 * c + 1] % 2,
                "px": 2 * math.pi * digest[4 * c + 2] / 256,
                "py": 2 * math.pi * digest[4 * c + 3] / 256,
                "dx": 0.25 + 0.75 * digest[12 + 2 * c] / 255,
                "dy": 0.25 + 0.75 * digest[13 + 2 * c] / 255,
            }
        )
    return chans


def _trig_image(prompt: str, seed: int, width: int, height: int, t: float = 0.0) -> ImageBuf:
    xs = np.arange(width)[None, :]
    ys = np.arange(height)[:, None]
    out = np.empty((height, width, 3))
    for c, p in enumerate(_field_params(prompt, seed)):
        phase_x = p["px"] + 2 * math.pi * p["dx"] * t
        phase_y = p["py"] + 2 * math.pi * p["dy"] * t
        wave = np.sin(2 * math.pi * p["fx"] * xs / width + phase_x) * np.sin(
            2 * math.pi * p["fy"] * ys / height + phase_y
        )
        # saturate then darken: high cell contrast, dark-dominant background
        out[:, :, c] = np.clip(0.5 + 1.0 * wave, 0.0, 1.0) ** 2 * 255
    return ImageBuf.from_array(np.rint(out).astype(np.uint8))


def mock_text_to_image(prompt: str, seed: int = 0, width: int = 64, height: int = 64) -> ImageBuf:
    if not (8 <= width <= 1024 and 8 <= height <= 1024):
        raise BadDimensions(f"{width}x{height} outside 8..1024")
    return _trig_image(prompt, seed, width, height)


def mock_style_transfer(content: ImageBuf, style: ImageBuf, strength: float = 0.5) -> ImageBuf:
    """Per-channel mean/std matching, blended with the original by strength."""
    eps = 1e-6
    c = content.to_array().astype(np.float64)
    s = style.to_array().astype(np.float64)
    out = np.empty_like(c)
    for ch in range(3):
        mu_c, sigma_c = c[:, :, ch].mean(), c[:, :, ch].std()
        mu_s, sigma_s = s[:, :, ch].mean(), s[:, :, ch].std()
        matched = (c[:, :, ch] - mu_c) * (sigma_s / max(sigma_c, eps)) + mu_s
        out[:, :, ch] = matched * strength + c[:, :, ch] * (1.0 - strength)
    return ImageBuf.from_array(np.rint(np.clip(out, 0, 255)).astype(np.uint8))


def mock_image_edit(img: ImageBuf, brightness: int = 16) -> ImageBuf:
    arr = img.to_array().astype(np.int64) + int(brightness)
    return ImageBuf.from_array(np.clip(arr, 0, 255).astype(np.uint8))


_COLOR_NAMES = ("red", "green", "blue")


def mock_image_to_text(img: ImageBuf) -> str:
    """Caption from quantized features: 'a {brightness} {color} {texture} scene'."""
    arr = img.to_array().astype(np.float64)
    means = arr.reshape(-1, 3).mean(axis=0)
    color = _COLOR_NAMES[int(np.argmax(means))]  # ties resolve R > G > B
    luma = arr @ np.array([0.299, 0.587, 0.114])
    mean_luma = luma.mean()
    brightness = "dark" if mean_luma < 85 else ("medium" if mean_luma < 170 else "bright")
    if img.width > 1:
        gradient = np.abs(np.diff(luma, axis=1)).mean()
    else:
        gradient = 0.0
    texture = "textured" if gradient > 10 else "flat"
    return f"a {brightness} {color} {texture} scene"


# ---------------------------------------------------------------------------
# Video


def mock_text_to_video(
    prompt: str, seed: int = 0, n_frames: int = 16, width: int = 64, height: int = 64
) -> VideoBuf:
    if not 2 <= n_frames <= 256:
        raise BadFrameCount(f"n_frames {n_frames} outside 2..256")
    if not (8 <= width <= 1024 and 8 <= height <= 1024):
        raise BadDimensions(f"{width}x{height} outside 8..1024")
    frames = tuple(
        _trig_image(prompt, seed, width, height, t=k / VIDEO_FPS) for k in range(n_frames)
    )
    return VideoBuf(frames=frames, fps=VIDEO_FPS)


def mock_video_summary(video: VideoBuf) -> str:
    """Caption of the medoid frame (min total embedding distance, lowest index on ties)."""
    vecs = [embed_image(f).values.astype(np.float64) for f in video.frames]
    n = len(vecs)
    totals = np.zeros(n)
    for i in range(n):
        for j in range(n):
            totals[i] += np.linalg.norm(vecs[i] - vecs[j])
    medoid = int(np.argmin(totals))
    return "summary: " + mock_image_to_text(video.frames[medoid])


# ---------------------------------------------------------------------------
# Audio: an invertible tone codec gives the TTS/ASR pair an exact oracle


@dataclass(frozen=True)
class ToneCodec:
    """One 0.1 s sine per symbol; frequencies 400 + 50*i Hz land on exact DFT bins."""

    alphabet: str = "abcdefghijklmnopqrstuvwxyz .,!?-"
    char_duration: float = 0.1
    base_freq: float = 400.0
    freq_step: float = 50.0
    amplitude: int = 16383  # 0.5 of int16 full scale

    def __post_init__(self):
        assert len(self.alphabet) == 32
        assert self.freq(len(self.alphabet) - 1) < AUDIO_SAMPLE_RATE / 2

    def freq(self, index: int) -> float:
        return self.base_freq + self.freq_step * index

    @property
    def frame_len(self) -> int:
        return int(self.char_duration * AUDIO_SAMPLE_RATE)  # 1600 samples

    def waveforms(self) -> np.ndarray:
        """(32, frame_len) int16 bank of per-symbol segments."""
        t = np.arange(self.frame_len)
        bank = np.empty((len(self.alphabet), self.frame_len), dtype=np.int16)
        for i in range(len(self.alphabet)):
            bank[i] = np.round(
                self.amplitude * np.sin(2 * np.pi * self.freq(i) * t / AUDIO_SAMPLE_RATE)
            ).astype(np.int16)
        return bank

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """(frame_len, 32) cosine and sine banks for single-bin DFT responses."""
        t = np.arange(self.frame_len)[:, None]
        freqs = np.array([self.freq(i) for i in range(len(self.alphabet))])[None, :]
        angles = 2 * np.pi * freqs * t / AUDIO_SAMPLE_RATE
        return np.cos(angles).astype(np.float32), np.sin(angles).astype(np.float32)


@lru_cache(maxsize=4)
def _codec_tables(codec: ToneCodec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cos_bank, sin_bank = codec.basis()
    return codec.waveforms(), cos_bank, sin_bank


MAX_TTS_SYMBOLS = 4096

DEFAULT_CODEC = ToneCodec()


def mock_tts(text: str, codec: ToneCodec = DEFAULT_CODEC) -> AudioBuf:
    if len(text) > MAX_TTS_SYMBOLS:
        raise TextTooLong(f"{len(text)} symbols, max {MAX_TTS_SYMBOLS}")
    index = {c: i for i, c in enumerate(codec.alphabet)}
    symbols = [index.get(c, index[" "]) for c in text.lower()]
    waveforms, _, _ = _codec_tables(codec)
    return AudioBuf(samples=waveforms[symbols].tobytes())


def mock_asr(audio: AudioBuf, codec: ToneCodec = DEFAULT_CODEC) -> str:
    frame_len = codec.frame_len
    x = audio.to_array()
    if x.size % frame_len != 0:
        raise BadFrameLength(f"{x.size} samples is not a multiple of {frame_len}")
    _, cos_bank, sin_bank = _codec_tables(codec)
    frames = x.reshape(-1, frame_len).astype(np.float32)
    # squared single-bin DFT response per candidate frequency
    responses = (frames @ cos_bank) ** 2 + (frames @ sin_bank) ** 2
    picks = np.argmax(responses, axis=1)  # argmax takes the lowest index on ties
    return "".join(codec.alphabet[i] for i in picks)


# ---------------------------------------------------------------------------
# Translation and prompt expansion


@lru_cache(maxsize=1)
def _lexicon() -> list[tuple[str, str]]:
    pairs = []
    for line in _data_text("lexicon.tsv").splitlines():
        if line.strip():
            en, zh = line.split("\t")
            pairs.append((en, zh))
    return pairs


def _is_cjk(ch: str) -> bool:
    return "一" <= ch <= "鿿"


def mock_translate(text: str, direction: str = "en-zh") -> str:
    """Lexicon token substitution; unknown tokens pass through unchanged."""
    if direction not in ("en-zh", "zh-en"):
        raise ValueError(f"direction {direction!r}")
    pairs = _lexicon()
    if direction == "en-zh":
        table = {en: zh for en, zh in pairs}
        out = []
        for token in text.split(" "):
            core = token.strip(".,!?;:")
            if core.lower() in table:
                out.append(token.replace(core, table[core.lower()]))
            else:
                out.append(token)
        return " ".join(out)
    # zh-en: greedy longest-match segmentation over CJK runs
    table = {zh: en for en, zh in pairs}
    max_len = max((len(k) for k in table), default=1)
    out = []
    i = 0
    while i < len(text):
        if _is_cjk(text[i]):
            match = None
            for ln in range(min(max_len, len(text) - i), 0, -1):
                if text[i : i + ln] in table:
                    match = text[i : i + ln]
                    break
            if match:
                if out and out[-1] and not out[-1].endswith(" "):
                    out.append(" ")
                out.append(table[match])
                i += len(match)
                if i < len(text) and _is_cjk(text[i]):
                    out.append(" ")
                continue
        out.append(text[i])
        i += 1
    return "".join(out)


@dataclass(frozen=True)
class KbEntry:
    keyword: str
    tags: tuple[str, ...]


@lru_cache(maxsize=1)
def default_kb() -> tuple[KbEntry, ...]:
    return load_kb(_data_text("keywords.jsonl"))


def load_kb(text: str) -> tuple[KbEntry, ...]:
    entries = []
    for line in text.splitlines():
        if line.strip():
            obj = json.loads(line)
            entries.append(KbEntry(keyword=obj["keyword"], tags=tuple(obj["tags"])))
    return tuple(entries)


def prompt_expand(prompt: str, kb: tuple[KbEntry, ...] | None = None, k: int = 3) -> str:
    """Append the tags of the k nearest KB keywords (cosine on text fingerprints)."""
    if kb is None:
        kb = default_kb()
    if not kb:
        raise EmptyKb("keyword knowledge base is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    query = embed_text(prompt)
    scores = [cosine(query, embed_text(e.keyword)) for e in kb]
    order = sorted(range(len(kb)), key=lambda i: (-scores[i], i))[:k]
    tags = []
    for i in order:
        tags.extend(kb[i].tags)
    return prompt + ", " + ", ".join(tags)
