"""Provenance registry: mints URIs, stores detailed descriptions, links embeddings.

Every registered output gets three linked elements: a unique URI, a detailed
description record (who/where/when plus provenance), and a fingerprint
embedding appended to the vector store.  Durability follows a strict append
order: embedding first (journal), record line last, so recovery after a
crash only ever drops unreferenced trailing embeddings, never a record that
points at a missing vector.

Files under one data directory:
    registry.jsonl   schema header line + one record per line (append-only)
    vectors.urix     canonical vector snapshot (rewritten by save)
    vectors.journal  embeddings appended since the last snapshot
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .fingerprints import DIMS, Embedder, Embedding, embedder_for
from .media import MODALITY_BY_TAG, Artifact, Modality, content_hash
from .store import EmbeddingStore, load_store, save_store

SCHEMA = "maid-registry"
SCHEMA_VERSION = 1
_RECORD_FIELDS = ["uri", "modality", "digest", "embedding_ref", "description"]
_DESC_FIELDS = [
    "device",
    "ip",
    "user_account",
    "timestamp",
    "flow_run_id",
    "stage_kind",
    "modality",
    "content_digest",
    "flow_name",
    "parent_uris",
    "note",
]


class RegistryError(Exception):
    pass


class NotFound(RegistryError):
    pass


class EmbedderModalityMismatch(RegistryError):
    pass


class StoreFull(RegistryError):
    pass


class PersistFailure(RegistryError):
    pass


class RegistryCorrupt(RegistryError):
    pass


@dataclass(frozen=True)
class RegistrationContext:
    device: str
    ip: str
    user_account: str
    timestamp: int
    flow_run_id: str | None = None
    stage_kind: str | None = None

    def __post_init__(self):
        if not self.user_account:
            raise ValueError("user_account must be nonempty")
        if self.timestamp <= 0:
            raise ValueError("timestamp must be positive")


@dataclass(frozen=True)
class DetailedDescription:
    device: str
    ip: str
    user_account: str
    timestamp: int
    flow_run_id: str
    stage_kind: str
    modality: Modality
    content_digest: str
    flow_name: str
    parent_uris: tuple[str, ...]
    note: str

    def to_obj(self) -> dict:
        obj = {}
        for name in _DESC_FIELDS:
            value = getattr(self, name)
            if name == "modality":
                value = value.value
            elif name == "parent_uris":
                value = list(value)
            obj[name] = value
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "DetailedDescription":
        return cls(
            device=obj["device"],
            ip=obj["ip"],
            user_account=obj["user_account"],
            timestamp=int(obj["timestamp"]),
            flow_run_id=obj["flow_run_id"],
            stage_kind=obj["stage_kind"],
            modality=Modality(obj["modality"]),
            content_digest=obj["content_digest"],
            flow_name=obj["flow_name"],
            parent_uris=tuple(obj["parent_uris"]),
            note=obj["note"],
        )


@dataclass(frozen=True)
class UriRecord:
    uri: str
    description: DetailedDescription
    embedding_ref: int
    content_digest: str
    modality: Modality

    def to_line(self) -> str:
        obj = {
            "uri": self.uri,
            "modality": self.modality.value,
            "digest": self.content_digest,
            "embedding_ref": self.embedding_ref,
            "description": self.description.to_obj(),
        }
        return json.dumps(obj, separators=(",", ":"), ensure_ascii=True)

    @classmethod
    def from_line(cls, line: str) -> "UriRecord":
        obj = json.loads(line)
        return cls(
            uri=obj["uri"],
            description=DetailedDescription.from_obj(obj["description"]),
            embedding_ref=int(obj["embedding_ref"]),
            content_digest=obj["digest"],
            modality=Modality(obj["modality"]),
        )


def mint_uri(ctx: RegistrationContext, modality: Modality, content_digest: str, seq: int) -> str:
    """maid://{user}/{modality}/{yyyymmdd}/{digest prefix}-{seq}; seq keeps duplicates apart."""
    day = datetime.fromtimestamp(ctx.timestamp, tz=timezone.utc).strftime("%Y%m%d")
    return f"maid://{ctx.user_account}/{modality.value}/{day}/{content_digest[:16]}-{seq}"


def build_description(
    ctx: RegistrationContext,
    modality: Modality,
    digest: str,
    flow_name: str = "",
    parent_uris: tuple[str, ...] = (),
    note: str = "",
) -> DetailedDescription:
    return DetailedDescription(
        device=ctx.device,
        ip=ctx.ip,
        user_account=ctx.user_account,
        timestamp=ctx.timestamp,
        flow_run_id=ctx.flow_run_id or "",
        stage_kind=ctx.stage_kind or "",
        modality=modality,
        content_digest=digest,
        flow_name=flow_name,
        parent_uris=tuple(parent_uris),
        note=note,
    )


def _header_line() -> str:
    return json.dumps(
        {"schema": SCHEMA, "version": SCHEMA_VERSION, "fields": _RECORD_FIELDS},
        separators=(",", ":"),
    )


class Registry:
    """One writer, many readers; registrations are serialized by the caller."""

    def __init__(self, data_dir: str | Path, capacity: int | None = None):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.registry_path = self.data_dir / "registry.jsonl"
        self.vectors_path = self.data_dir / "vectors.urix"
        self.journal_path = self.data_dir / "vectors.journal"
        self.store = EmbeddingStore()
        self.capacity = capacity
        self._records: dict[str, UriRecord] = {}
        self._order: list[str] = []
        self._seq = 0
        self._registry_file = None
        self._journal_file = None

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def open(cls, data_dir: str | Path, capacity: int | None = None) -> "Registry":
        reg = cls(data_dir, capacity=capacity)
        reg._recover()
        return reg

    def close(self) -> None:
        self.save()
        if self._registry_file is not None:
            self._registry_file.close()
            self._registry_file = None

    def save(self) -> None:
        """Snapshot vectors and truncate the journal; record lines are already durable."""
        try:
            save_store(self.store, self.vectors_path)
            if self._journal_file is not None:
                self._journal_file.close()
                self._journal_file = None
            self.journal_path.write_bytes(b"")
            if self._registry_file is not None:
                self._registry_file.flush()
        except OSError as exc:
            raise PersistFailure(str(exc)) from exc

    # -- registration ------------------------------------------------------

    def register(
        self,
        artifact: Artifact,
        ctx: RegistrationContext,
        embedder: Embedder | None = None,
        flow_name: str = "",
        parent_uris: tuple[str, ...] = (),
        note: str = "",
    ) -> UriRecord:
        """Digest -> mint URI -> fingerprint -> append embedding -> persist record."""
        if embedder is not None and embedder.modality != artifact.modality:
            raise EmbedderModalityMismatch(
                f"{embedder.modality.value} embedder for {artifact.modality.value} artifact"
            )
        if self.capacity is not None and len(self._order) >= self.capacity:
            raise StoreFull(f"registry holds {self.capacity} records")
        digest = content_hash(artifact)
        embedding = (embedder or embedder_for(artifact.modality))(artifact.payload)
        uri = mint_uri(ctx, artifact.modality, digest, self._seq)
        try:
            ref = self.store.put(uri, embedding)
            self._append_journal(embedding)
            description = build_description(
                ctx, artifact.modality, digest, flow_name, parent_uris, note
            )
            record = UriRecord(
                uri=uri,
                description=description,
                embedding_ref=ref,
                content_digest=digest,
                modality=artifact.modality,
            )
            self._append_record_line(record)
        except OSError as exc:
            raise PersistFailure(str(exc)) from exc
        self._records[uri] = record
        self._order.append(uri)
        self._seq += 1
        return record

    def lookup(self, uri: str) -> UriRecord:
        record = self._records.get(uri)
        if record is None:
            raise NotFound(uri)
        return record

    def records(self) -> list[UriRecord]:
        return [self._records[u] for u in self._order]

    def __len__(self) -> int:
        return len(self._order)

    # -- persistence internals ----------------------------------------------

    def _registry_handle(self):
        if self._registry_file is None:
            new = not self.registry_path.exists() or self.registry_path.stat().st_size == 0
            self._registry_file = open(self.registry_path, "a", encoding="utf-8")
            if new:
                self._registry_file.write(_header_line() + "\n")
                self._registry_file.flush()
        return self._registry_file

    def _append_record_line(self, record: UriRecord) -> None:
        handle = self._registry_handle()
        handle.write(record.to_line() + "\n")
        handle.flush()

    def _append_journal(self, embedding: Embedding) -> None:
        frame = struct.pack(
            "<BI", embedding.modality.tag, embedding.values.shape[0]
        ) + embedding.values.astype("<f4").tobytes()
        if self._journal_file is None:
            self._journal_file = open(self.journal_path, "ab")
        self._journal_file.write(frame)
        self._journal_file.flush()

    def _recover(self) -> None:
        if self.vectors_path.exists():
            self.store = load_store(self.vectors_path)
        if self.journal_path.exists():
            self._replay_journal(self.journal_path.read_bytes())

        lines: list[str] = []
        if self.registry_path.exists():
            raw = self.registry_path.read_text(encoding="utf-8")
            complete = raw[: raw.rfind("\n") + 1] if "\n" in raw else ""
            lines = complete.splitlines()
        if lines:
            header = json.loads(lines[0])
            if header.get("schema") != SCHEMA:
                raise RegistryCorrupt("missing schema header line")
            if header.get("version") != SCHEMA_VERSION:
                raise RegistryCorrupt(f"unsupported schema version {header.get('version')}")
        per_modality: dict[Modality, int] = {m: 0 for m in Modality}
        for line in lines[1:]:
            try:
                record = UriRecord.from_line(line)
            except (json.JSONDecodeError, KeyError, ValueError):
                break  # partial trailing write; everything after is dropped
            expected_ref = per_modality[record.modality]
            if record.embedding_ref != expected_ref:
                raise RegistryCorrupt(
                    f"record {record.uri} expects ref {expected_ref}, has {record.embedding_ref}"
                )
            if record.embedding_ref >= self.store.segment_count(record.modality):
                raise RegistryCorrupt(f"record {record.uri} references a missing embedding")
            per_modality[record.modality] += 1
            self._records[record.uri] = record
            self._order.append(record.uri)
            self.store.set_uri(record.modality, record.embedding_ref, record.uri)
        # drop unreferenced trailing embeddings (registration was interrupted)
        for modality, count in per_modality.items():
            self.store.truncate(modality, count)
        self._seq = len(self._order)

    def _replay_journal(self, data: bytes) -> None:
        pos = 0
        while pos + 5 <= len(data):
            tag, dim = struct.unpack("<BI", data[pos : pos + 5])
            modality = MODALITY_BY_TAG.get(tag)
            if modality is None or dim != DIMS[modality]:
                break  # torn frame header
            end = pos + 5 + dim * 4
            if end > len(data):
                break  # torn frame body
            values = np.frombuffer(data[pos + 5 : end], dtype="<f4")
            self.store.put("", Embedding(modality, values))
            pos = end
