"""Perturb-and-retrieve experiments with 2-D PCA scatter reports.

The harness takes registered-style originals, applies modification operators
(masking, overlays, sentence edits), and measures whether fingerprint
retrieval still finds each original among distractors.  The scatter groups
points as positive (originals), noise (modified copies), and negative
(distractors) for plotting.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .charlm import lm_generate
from .fingerprints import embed_artifact
from .media import Artifact, ImageBuf
from .mocks import _lexicon, default_lm, mock_text_to_image
from .pca import pca_project

# ---------------------------------------------------------------------------
# Image operators (25% mask, 10% overlay)


def mask_rect(img: ImageBuf, rng: random.Random) -> ImageBuf:
    """Black out a randomly placed rectangle covering 25% of the area."""
    arr = img.to_array().copy()
    rw, rh = round(img.width / 2), round(img.height / 2)
    x0 = rng.randint(0, img.width - rw)
    y0 = rng.randint(0, img.height - rh)
    arr[y0 : y0 + rh, x0 : x0 + rw, :] = 0
    return ImageBuf.from_array(arr)


def overlay_rect(img: ImageBuf, rng: random.Random) -> ImageBuf:
    """Paste new procedural content over a random 10%-area rectangle."""
    side = max(8, round(math.sqrt(0.10) * min(img.width, img.height)))
    arr = img.to_array().copy()
    x0 = rng.randint(0, img.width - side)
    y0 = rng.randint(0, img.height - side)
    patch = mock_text_to_image(f"overlay {rng.randint(0, 10**9)}", seed=rng.randint(0, 10**9),
                               width=side, height=side)
    arr[y0 : y0 + side, x0 : x0 + side, :] = patch.to_array()
    return ImageBuf.from_array(arr)


def mask_and_overlay(img: ImageBuf, rng: random.Random) -> ImageBuf:
    return overlay_rect(mask_rect(img, rng), rng)


IMAGE_OPERATORS = {
    "mask": mask_rect,
    "overlay": overlay_rect,
    "both": mask_and_overlay,
}

# ---------------------------------------------------------------------------
# Text operators (sentence-level edits and lexicon paraphrase)


def _split_sentences(text: str) -> list[str]:
    return [s.strip() for s in text.split(".") if s.strip()]


def _join_sentences(sentences: list[str]) -> str:
    return ". ".join(sentences) + "."


def delete_sentences(text: str, rng: random.Random, frac: float = 0.2) -> str:
    sentences = _split_sentences(text)
    k = max(1, round(frac * len(sentences)))
    if len(sentences) - k < 1:
        k = len(sentences) - 1
    drop = set(rng.sample(range(len(sentences)), k)) if k > 0 else set()
    return _join_sentences([s for i, s in enumerate(sentences) if i not in drop])


def insert_foreign(text: str, rng: random.Random, pool: list[str], count: int = 2) -> str:
    sentences = _split_sentences(text)
    for _ in range(count):
        sentences.insert(rng.randint(0, len(sentences)), rng.choice(pool))
    return _join_sentences(sentences)


def shuffle_sentences(text: str, rng: random.Random) -> str:
    sentences = _split_sentences(text)
    rng.shuffle(sentences)
    return _join_sentences(sentences)


def paraphrase_lexicon(text: str, rng: random.Random, rate: float = 0.3) -> str:
    """Swap lexicon-known words for their translations at the given rate."""
    table = {en: zh for en, zh in _lexicon()}
    out = []
    for token in text.split(" "):
        core = token.strip(".,!?;:")
        if core.lower() in table and rng.random() < rate:
            out.append(token.replace(core, table[core.lower()]))
        else:
            out.append(token)
    return " ".join(out)


def text_operators(pool: list[str]) -> dict:
    return {
        "delete": delete_sentences,
        "insert": lambda t, rng: insert_foreign(t, rng, pool),
        "shuffle": shuffle_sentences,
        "paraphrase": paraphrase_lexicon,
    }


# ---------------------------------------------------------------------------
# Harness


@dataclass
class PerturbationReport:
    modality: str
    n_originals: int
    n_distractors: int
    n_queries: int
    n_correct: int
    accuracy: float
    trivial: bool
    explained_variances: tuple[float, float]
    rows: list[tuple[str, str, float, float, float]] = field(default_factory=list)

    def centroid(self, group: str) -> tuple[float, float]:
        pts = [(x, y) for g, _, x, y, _ in self.rows if g == group]
        if not pts:
            raise ValueError(f"no rows in group {group!r}")
        return (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))

    def noise_centroid_closer_to_positive(self) -> bool:
        noise = self.centroid("noise")
        pos = self.centroid("positive")
        neg = self.centroid("negative")
        d_pos = math.hypot(noise[0] - pos[0], noise[1] - pos[1])
        d_neg = math.hypot(noise[0] - neg[0], noise[1] - neg[1])
        return d_pos < d_neg

    def to_csv(self) -> str:
        lines = ["group,label,x,y,score"]
        for group, label, x, y, score in self.rows:
            lines.append(f"{group},{label},{x:.6f},{y:.6f},{score:.6f}")
        return "\n".join(lines) + "\n"


def perturbation_experiment(
    originals: list[Artifact],
    operators: dict,
    distractors: list[Artifact],
    seed: int = 0,
) -> PerturbationReport:
    """Embed originals + perturbed variants + distractors; score top-1 retrieval."""
    if not originals:
        raise ValueError("need at least one original")
    modality = originals[0].modality
    if any(a.modality != modality for a in originals + distractors):
        raise ValueError("all artifacts must share one modality")

    rng = random.Random(seed)
    orig_vecs = np.stack([embed_artifact(a).values for a in originals])
    dist_vecs = (
        np.stack([embed_artifact(a).values for a in distractors])
        if distractors
        else np.empty((0, orig_vecs.shape[1]), dtype=np.float32)
    )
    corpus = np.concatenate([orig_vecs, dist_vecs])

    noise_vecs = []
    noise_labels = []
    noise_scores = []
    correct = 0
    total = 0
    for i, artifact in enumerate(originals):
        for op_name, op in operators.items():
            perturbed = op(artifact.payload, rng)
            vec = embed_artifact(Artifact.new(perturbed)).values
            noise_vecs.append(vec)
            noise_labels.append(f"o{i}:{op_name}")
            noise_scores.append(float(np.dot(vec, orig_vecs[i])))
            scores = corpus @ vec
            top = int(np.argmax(scores))  # ties resolve to the lowest index
            if top == i:
                correct += 1
            total += 1

    trivial = len(distractors) == 0
    accuracy = 1.0 if trivial else correct / total

    all_vecs = np.concatenate([orig_vecs, np.stack(noise_vecs), dist_vecs])
    coords, variances = pca_project(all_vecs.astype(np.float64), out_dims=2)

    rows: list[tuple[str, str, float, float, float]] = []
    pos_coords = coords[: len(originals)]
    for i in range(len(originals)):
        rows.append(("positive", f"o{i}", float(pos_coords[i, 0]), float(pos_coords[i, 1]), 1.0))
    noise_coords = coords[len(originals) : len(originals) + len(noise_vecs)]
    for j in range(len(noise_vecs)):
        rows.append(
            (
                "noise",
                noise_labels[j],
                float(noise_coords[j, 0]),
                float(noise_coords[j, 1]),
                noise_scores[j],
            )
        )
    neg_coords = coords[len(originals) + len(noise_vecs) :]
    for j in range(len(distractors)):
        best = float(np.max(dist_vecs[j] @ orig_vecs.T)) if len(originals) else 0.0
        rows.append(("negative", f"d{j}", float(neg_coords[j, 0]), float(neg_coords[j, 1]), best))

    return PerturbationReport(
        modality=modality.value,
        n_originals=len(originals),
        n_distractors=len(distractors),
        n_queries=total,
        n_correct=correct,
        accuracy=accuracy,
        trivial=trivial,
        explained_variances=(float(variances[0]), float(variances[1])),
        rows=rows,
    )


# ---------------------------------------------------------------------------
# Bundled image and text reproductions


def fig_image_experiment(n: int = 50, m: int = 50, seed: int = 0, size: int = 64) -> PerturbationReport:
    """Mask/overlay perturbations on procedural images."""
    originals = [
        Artifact.new(mock_text_to_image(f"movie scene {i}", seed=i, width=size, height=size))
        for i in range(n)
    ]
    distractors = [
        Artifact.new(
            mock_text_to_image(f"unrelated scene {j}", seed=10_000 + j, width=size, height=size)
        )
        for j in range(m)
    ]
    return perturbation_experiment(originals, IMAGE_OPERATORS, distractors, seed=seed)


_TOPICS = (
    "the lighthouse keeper",
    "a city of glass",
    "the harbor logbook",
    "an honest machine",
    "the paper lantern festival",
    "a mapmaker's promise",
    "the midnight projectionist",
    "a storm in three grays",
    "the apprentice's ledger",
    "a boat of borrowed wood",
)


def synth_plot(idx: int, n_sentences: int = 8, sentence_len: int = 55) -> str:
    """Deterministic plot text: several sampled sentences joined with periods."""
    lm = default_lm()
    sentences = []
    for s in range(n_sentences):
        prompt = _TOPICS[(idx + s) % len(_TOPICS)]
        out = lm_generate(lm, prompt + " ", n=sentence_len, seed=idx * 1009 + s)
        sentences.append(out.replace(".", " ").strip())
    return _join_sentences(sentences)


def fig_text_experiment(n: int = 50, m: int = 50, seed: int = 0) -> PerturbationReport:
    """Sentence delete/insert/shuffle/paraphrase perturbations on generated plots."""
    originals = [Artifact.new(synth_plot(i)) for i in range(n)]
    distractors = [Artifact.new(synth_plot(10_000 + j)) for j in range(m)]
    pool = _split_sentences(synth_plot(77_777, n_sentences=12))
    return perturbation_experiment(originals, text_operators(pool), distractors, seed=seed)
