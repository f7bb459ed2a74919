"""Human-steerable multimodal pipelines with a provenance registry.

Compose modality-typed stage graphs, pause at checkpoints for hand edits,
and register every output with a unique URI, a detailed description, and a
fingerprint embedding that supports fuzzy retrieval after modification.
"""
from .backends import BackendRegistry, default_registry
from .fingerprints import (
    Embedding,
    cosine,
    embed_artifact,
    embed_audio,
    embed_image,
    embed_text,
    embed_video,
)
from .flows import (
    Engine,
    FlowSpec,
    RunState,
    RunStatus,
    StageKind,
    StageSpec,
    parse_flow_spec,
    plan_order,
    validate_flow,
)
from .media import (
    Artifact,
    AudioBuf,
    ImageBuf,
    Modality,
    VideoBuf,
    content_hash,
    parse_image_ppm,
    parse_wav,
    write_image_ppm,
    write_wav,
)
from .pca import pca_project
from .registry import Registry, RegistrationContext, UriRecord, mint_uri
from .store import EmbeddingStore, QueryResult, load_store, save_store

__version__ = "0.1.0"
