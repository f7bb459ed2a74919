"""Bundled example flow documents."""
from __future__ import annotations

from importlib.resources import files

BUNDLED = {
    "text-image-style": "text_image_style.json",
    "image-story-av": "image_story_av.json",
}


def bundled_flow_doc(name: str) -> str:
    """JSON text of a bundled flow document by its flow name."""
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled flow {name!r}; have {sorted(BUNDLED)}")
    return files("modalflow.flowdocs").joinpath(BUNDLED[name]).read_text(encoding="utf-8")
