"""Modality-typed DAG pipelines with human-edit checkpoints.

A flow is a graph of stages whose ports carry one modality each; validation
guarantees every wire is modality-compatible before anything executes.
Execution pauses at checkpoint stages, holding the raw output until a human
commits an edited replacement (the edit becomes its own provenance step),
then resumes in plan order.
"""
from __future__ import annotations

import heapq
import json
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum

from .media import Artifact, Modality

# ---------------------------------------------------------------------------
# Stage taxonomy


class StageKind(str, Enum):
    TEXT_GEN = "TextGen"
    CHAT = "Chat"
    TEXT_TO_IMAGE = "TextToImage"
    IMAGE_TO_TEXT = "ImageToText"
    STYLE_TRANSFER = "StyleTransfer"
    IMAGE_EDIT = "ImageEdit"
    TTS = "Tts"
    ASR = "Asr"
    TEXT_TO_VIDEO = "TextToVideo"
    VIDEO_SUMMARY = "VideoSummary"
    TRANSLATE = "Translate"
    PROMPT_EXPAND = "PromptExpand"


@dataclass(frozen=True)
class Signature:
    inputs: tuple[tuple[str, Modality], ...]  # ordered (port, modality)
    output: Modality

    def port_modality(self, port: str) -> Modality | None:
        for name, modality in self.inputs:
            if name == port:
                return modality
        return None


SIGNATURES: dict[StageKind, Signature] = {
    StageKind.TEXT_GEN: Signature((("in", Modality.TEXT),), Modality.TEXT),
    StageKind.CHAT: Signature((("in", Modality.TEXT),), Modality.TEXT),
    StageKind.TEXT_TO_IMAGE: Signature((("in", Modality.TEXT),), Modality.IMAGE),
    StageKind.IMAGE_TO_TEXT: Signature((("in", Modality.IMAGE),), Modality.TEXT),
    StageKind.STYLE_TRANSFER: Signature(
        (("content", Modality.IMAGE), ("style", Modality.IMAGE)), Modality.IMAGE
    ),
    StageKind.IMAGE_EDIT: Signature((("in", Modality.IMAGE),), Modality.IMAGE),
    StageKind.TTS: Signature((("in", Modality.TEXT),), Modality.AUDIO),
    StageKind.ASR: Signature((("in", Modality.AUDIO),), Modality.TEXT),
    StageKind.TEXT_TO_VIDEO: Signature((("in", Modality.TEXT),), Modality.VIDEO),
    StageKind.VIDEO_SUMMARY: Signature((("in", Modality.VIDEO),), Modality.TEXT),
    StageKind.TRANSLATE: Signature((("in", Modality.TEXT),), Modality.TEXT),
    StageKind.PROMPT_EXPAND: Signature((("in", Modality.TEXT),), Modality.TEXT),
}

# checkpoints pause for hand edits, which only make sense for editable payloads
CHECKPOINT_MODALITIES = (Modality.TEXT, Modality.IMAGE)


# ---------------------------------------------------------------------------
# Flow structure


class FlowSyntaxError(ValueError):
    pass


class UnknownStageKind(FlowSyntaxError):
    pass


class DuplicateNodeId(FlowSyntaxError):
    pass


@dataclass(frozen=True)
class StageSpec:
    id: str
    kind: StageKind
    backend: str = "mock"
    params: dict = field(default_factory=dict)
    checkpoint: bool = False

    def __post_init__(self):
        if self.checkpoint and SIGNATURES[self.kind].output not in CHECKPOINT_MODALITIES:
            raise FlowSyntaxError(
                f"node {self.id!r}: checkpoint only allowed on text/image outputs"
            )


@dataclass(frozen=True)
class Edge:
    from_node: str
    from_port: str
    to_node: str
    to_port: str


@dataclass(frozen=True)
class FlowInput:
    node: str
    port: str
    modality: Modality


@dataclass(frozen=True)
class FlowSpec:
    name: str
    nodes: tuple[StageSpec, ...]
    edges: tuple[Edge, ...] = ()
    inputs: tuple[FlowInput, ...] = ()
    outputs: tuple[str, ...] = ()

    def node(self, node_id: str) -> StageSpec:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def node_ids(self) -> set[str]:
        return {n.id for n in self.nodes}


_TOP_FIELDS = {"name", "nodes", "edges", "inputs", "outputs"}
_NODE_FIELDS = {"id", "kind", "backend", "params", "checkpoint"}
_SCALAR = (str, int, float, bool)


def parse_flow_spec(text: str) -> FlowSpec:
    """Parse a JSON flow document; unknown fields are rejected."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FlowSyntaxError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FlowSyntaxError("document root must be an object")
    unknown = set(obj) - _TOP_FIELDS
    if unknown:
        raise FlowSyntaxError(f"unknown fields {sorted(unknown)}")
    if "name" not in obj or not isinstance(obj["name"], str):
        raise FlowSyntaxError("missing or non-string 'name'")
    raw_nodes = obj.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise FlowSyntaxError("'nodes' must be a nonempty list")

    nodes = []
    seen = set()
    for item in raw_nodes:
        if not isinstance(item, dict):
            raise FlowSyntaxError("node entries must be objects")
        bad = set(item) - _NODE_FIELDS
        if bad:
            raise FlowSyntaxError(f"node has unknown fields {sorted(bad)}")
        node_id = item.get("id")
        if not isinstance(node_id, str) or not node_id:
            raise FlowSyntaxError("node 'id' must be a nonempty string")
        if node_id in seen:
            raise DuplicateNodeId(node_id)
        seen.add(node_id)
        kind_name = item.get("kind")
        try:
            kind = StageKind(kind_name)
        except ValueError:
            raise UnknownStageKind(str(kind_name)) from None
        params = item.get("params", {})
        if not isinstance(params, dict) or not all(
            isinstance(k, str) and isinstance(v, _SCALAR) for k, v in params.items()
        ):
            raise FlowSyntaxError(f"node {node_id!r}: params must map strings to scalars")
        backend = item.get("backend", "mock")
        if not isinstance(backend, str):
            raise FlowSyntaxError(f"node {node_id!r}: backend must be a string")
        checkpoint = item.get("checkpoint", False)
        if not isinstance(checkpoint, bool):
            raise FlowSyntaxError(f"node {node_id!r}: checkpoint must be a boolean")
        nodes.append(
            StageSpec(id=node_id, kind=kind, backend=backend, params=params, checkpoint=checkpoint)
        )

    edges = []
    for item in obj.get("edges", []):
        if not (isinstance(item, list) and len(item) == 4 and all(isinstance(x, str) for x in item)):
            raise FlowSyntaxError(f"edge {item!r} must be [from, fromPort, to, toPort]")
        edges.append(Edge(*item))

    inputs = []
    for item in obj.get("inputs", []):
        if not (isinstance(item, list) and len(item) == 3 and all(isinstance(x, str) for x in item)):
            raise FlowSyntaxError(f"input {item!r} must be [node, port, modality]")
        try:
            modality = Modality(item[2])
        except ValueError:
            raise FlowSyntaxError(f"unknown modality {item[2]!r}") from None
        inputs.append(FlowInput(node=item[0], port=item[1], modality=modality))

    outputs = obj.get("outputs", [])
    if not (isinstance(outputs, list) and all(isinstance(x, str) for x in outputs)):
        raise FlowSyntaxError("'outputs' must be a list of node ids")

    return FlowSpec(
        name=obj["name"],
        nodes=tuple(nodes),
        edges=tuple(edges),
        inputs=tuple(inputs),
        outputs=tuple(outputs),
    )


def flow_spec_to_doc(spec: FlowSpec) -> dict:
    """Inverse of parse_flow_spec, as a plain JSON-ready object."""
    return {
        "name": spec.name,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "backend": n.backend,
                "params": dict(n.params),
                "checkpoint": n.checkpoint,
            }
            for n in spec.nodes
        ],
        "edges": [[e.from_node, e.from_port, e.to_node, e.to_port] for e in spec.edges],
        "inputs": [[i.node, i.port, i.modality.value] for i in spec.inputs],
        "outputs": list(spec.outputs),
    }


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Issue:
    kind: str
    message: str


def validate_flow(spec: FlowSpec) -> list[Issue]:
    """Structural and modality checks; an empty report means runnable."""
    issues: list[Issue] = []
    ids = spec.node_ids()

    def add(kind, message):
        issues.append(Issue(kind=kind, message=message))

    for e in spec.edges:
        if e.from_node not in ids:
            add("UnknownNode", f"edge source {e.from_node!r} does not exist")
            continue
        if e.to_node not in ids:
            add("UnknownNode", f"edge target {e.to_node!r} does not exist")
            continue
        if e.from_port != "out":
            add("UnknownPort", f"{e.from_node!r} has no output port {e.from_port!r}")
            continue
        sig = SIGNATURES[spec.node(e.to_node).kind]
        expected = sig.port_modality(e.to_port)
        if expected is None:
            add("UnknownPort", f"{e.to_node!r} has no input port {e.to_port!r}")
            continue
        produced = SIGNATURES[spec.node(e.from_node).kind].output
        if produced != expected:
            add(
                "ModalityMismatch",
                f"{e.from_node}.out is {produced.value} but "
                f"{e.to_node}.{e.to_port} expects {expected.value}",
            )

    fed: dict[tuple[str, str], int] = {}
    for e in spec.edges:
        fed[(e.to_node, e.to_port)] = fed.get((e.to_node, e.to_port), 0) + 1
    for i in spec.inputs:
        if i.node not in ids:
            add("UnknownNode", f"external input targets missing node {i.node!r}")
            continue
        sig = SIGNATURES[spec.node(i.node).kind]
        expected = sig.port_modality(i.port)
        if expected is None:
            add("UnknownPort", f"{i.node!r} has no input port {i.port!r}")
            continue
        if expected != i.modality:
            add(
                "ModalityMismatch",
                f"external input {i.node}.{i.port} declared {i.modality.value}, "
                f"port expects {expected.value}",
            )
        fed[(i.node, i.port)] = fed.get((i.node, i.port), 0) + 1

    for n in spec.nodes:
        for port, _ in SIGNATURES[n.kind].inputs:
            count = fed.get((n.id, port), 0)
            if count == 0:
                add("UnfedPort", f"{n.id}.{port} has no edge or external input")
            elif count > 1:
                add("MultiplyFedPort", f"{n.id}.{port} is fed {count} times")

    for out in spec.outputs:
        if out not in ids:
            add("UnknownNode", f"output {out!r} does not exist")

    # cycle check over well-formed edges
    adj: dict[str, list[str]] = {i: [] for i in ids}
    indeg = {i: 0 for i in ids}
    for e in spec.edges:
        if e.from_node in ids and e.to_node in ids:
            adj[e.from_node].append(e.to_node)
            indeg[e.to_node] += 1
    queue = [i for i in ids if indeg[i] == 0]
    seen = 0
    while queue:
        cur = queue.pop()
        seen += 1
        for nxt in adj[cur]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(nxt)
    if seen != len(ids):
        add("CycleDetected", "flow graph contains a cycle")
        return issues  # reachability is meaningless with a cycle present

    # outputs must be reachable from external inputs
    reachable = {i.node for i in spec.inputs if i.node in ids}
    changed = True
    while changed:
        changed = False
        for e in spec.edges:
            if e.from_node in reachable and e.to_node not in reachable:
                reachable.add(e.to_node)
                changed = True
    for out in spec.outputs:
        if out in ids and out not in reachable:
            add("UnreachableOutput", f"output {out!r} is not reachable from any input")

    return issues


def plan_order(spec: FlowSpec) -> list[str]:
    """Topological order with ties broken by ascending node id."""
    ids = spec.node_ids()
    adj: dict[str, set[str]] = {i: set() for i in ids}
    indeg = {i: 0 for i in ids}
    for e in spec.edges:
        if e.to_node not in adj[e.from_node]:
            adj[e.from_node].add(e.to_node)
            indeg[e.to_node] += 1
    heap = [i for i in ids if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        cur = heapq.heappop(heap)
        order.append(cur)
        for nxt in sorted(adj[cur]):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(heap, nxt)
    if len(order) != len(ids):
        raise ValueError("cycle detected; validate the flow first")
    return order


# ---------------------------------------------------------------------------
# Execution


class RunStatus(str, Enum):
    RUNNING = "running"
    AWAITING_EDIT = "awaiting_edit"
    COMPLETED = "completed"
    FAILED = "failed"


class EngineError(Exception):
    pass


class RunNotFound(EngineError):
    pass


class WrongState(EngineError):
    pass


class EditModalityMismatch(EngineError):
    pass


class ExecutionModalityError(EngineError):
    """A backend produced a payload of the wrong modality (backend bug)."""


@dataclass
class LogEntry:
    node_id: str
    started_at: float
    finished_at: float
    backend: str


@dataclass
class RunState:
    run_id: str
    flow: FlowSpec
    status: RunStatus = RunStatus.RUNNING
    awaiting_node: str | None = None
    failure: str | None = None
    artifacts: dict[str, Artifact] = field(default_factory=dict)
    pending: dict[str, Artifact] = field(default_factory=dict)
    inputs: dict[tuple[str, str], Artifact] = field(default_factory=dict)
    log: list[LogEntry] = field(default_factory=list)
    all_artifacts: dict[str, Artifact] = field(default_factory=dict)

    def outputs(self) -> dict[str, Artifact]:
        return {n: self.artifacts[n] for n in self.flow.outputs if n in self.artifacts}

    def snapshot(self) -> "RunState":
        return replace(
            self,
            artifacts=dict(self.artifacts),
            pending=dict(self.pending),
            inputs=dict(self.inputs),
            log=list(self.log),
            all_artifacts=dict(self.all_artifacts),
        )


class Engine:
    """Owns run state; one executor mutates a run at a time."""

    def __init__(self, backends):
        self.backends = backends
        self._runs: dict[str, RunState] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._registry_lock = threading.Lock()

    def start_run(self, spec: FlowSpec, inputs: dict[tuple[str, str], Artifact]) -> RunState:
        """Execute until the first checkpoint, completion, or failure."""
        report = validate_flow(spec)
        if report:
            raise ValueError(f"flow does not validate: {report[0].message}")
        run = RunState(run_id=uuid.uuid4().hex[:12], flow=spec)
        with self._registry_lock:
            self._runs[run.run_id] = run
            self._locks[run.run_id] = threading.RLock()
        with self._locks[run.run_id]:
            problem = self._bind_inputs(run, inputs)
            if problem:
                run.status = RunStatus.FAILED
                run.failure = problem
                return run.snapshot()
            self._advance(run)
            return run.snapshot()

    def _bind_inputs(self, run: RunState, inputs: dict[tuple[str, str], Artifact]) -> str | None:
        declared = {(i.node, i.port): i.modality for i in run.flow.inputs}
        extra = set(inputs) - set(declared)
        if extra:
            return f"input_modality_mismatch: undeclared input port {sorted(extra)[0]}"
        for key, modality in declared.items():
            art = inputs.get(key)
            if art is None:
                return f"input_modality_mismatch: missing external input {key[0]}.{key[1]}"
            if art.modality != modality:
                return (
                    f"input_modality_mismatch: {key[0]}.{key[1]} expects "
                    f"{modality.value}, got {art.modality.value}"
                )
        run.inputs = dict(inputs)
        for art in inputs.values():
            run.all_artifacts[art.id] = art
        return None

    def _gather(self, run: RunState, node: StageSpec) -> dict[str, Artifact]:
        sig = SIGNATURES[node.kind]
        by_port: dict[str, Artifact] = {}
        incoming = {e.to_port: e for e in run.flow.edges if e.to_node == node.id}
        for port, _ in sig.inputs:
            if port in incoming:
                by_port[port] = run.artifacts[incoming[port].from_node]
            else:
                by_port[port] = run.inputs[(node.id, port)]
        return by_port

    def _advance(self, run: RunState) -> None:
        for node_id in plan_order(run.flow):
            if node_id in run.artifacts:
                continue
            node = run.flow.node(node_id)
            gathered = self._gather(run, node)
            try:
                impl = self.backends.resolve(node.backend, node.kind)
                started = time.time()
                payload = impl(gathered, dict(node.params))
                finished = time.time()
            except Exception as exc:  # any backend fault fails the whole run
                run.status = RunStatus.FAILED
                run.failure = f"backend_failure at {node_id}: {exc}"
                return
            expected = SIGNATURES[node.kind].output
            artifact = Artifact.new(
                payload,
                parents=tuple(gathered[p].id for p, _ in SIGNATURES[node.kind].inputs),
                stage_kind=node.kind.value,
            )
            if artifact.modality != expected:
                raise ExecutionModalityError(
                    f"{node_id} produced {artifact.modality.value}, expected {expected.value}"
                )
            run.all_artifacts[artifact.id] = artifact
            run.log.append(LogEntry(node_id, started, finished, node.backend))
            if node.checkpoint:
                run.pending[node_id] = artifact
                run.status = RunStatus.AWAITING_EDIT
                run.awaiting_node = node_id
                return
            run.artifacts[node_id] = artifact
        run.status = RunStatus.COMPLETED
        run.awaiting_node = None

    def submit_checkpoint_edit(self, run_id: str, node_id: str, edited: Artifact) -> RunState:
        """Commit the human edit (parented on the raw output) and resume."""
        run = self._get_live(run_id)
        with self._locks[run_id]:
            if run.status != RunStatus.AWAITING_EDIT or run.awaiting_node != node_id:
                raise WrongState(
                    f"run is {run.status.value}"
                    + (f", awaiting {run.awaiting_node!r}" if run.awaiting_node else "")
                )
            expected = SIGNATURES[run.flow.node(node_id).kind].output
            if edited.modality != expected:
                raise EditModalityMismatch(
                    f"edit is {edited.modality.value}, node outputs {expected.value}"
                )
            raw = run.pending.pop(node_id)
            committed = Artifact.new(edited.payload, parents=(raw.id,), stage_kind="human_edit")
            run.artifacts[node_id] = committed
            run.all_artifacts[committed.id] = committed
            run.status = RunStatus.RUNNING
            run.awaiting_node = None
            self._advance(run)
            return run.snapshot()

    def get_run(self, run_id: str) -> RunState:
        run = self._get_live(run_id)
        with self._locks[run_id]:
            return run.snapshot()

    def _get_live(self, run_id: str) -> RunState:
        with self._registry_lock:
            run = self._runs.get(run_id)
        if run is None:
            raise RunNotFound(run_id)
        return run
