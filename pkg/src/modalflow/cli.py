"""Command-line front door: validate/run flows, register/search, demo reports.

Artifacts on disk: .txt/.md text, .ppm images, .wav audio, directories with
meta.json for video.  `flow run` pauses at checkpoints when --edit is given
(reading replacements interactively or from --edit-file assignments) and
otherwise commits identity edits so unattended runs complete.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .backends import default_registry
from .experiments import fig_image_experiment, fig_text_experiment
from .fingerprints import embed_artifact
from .flows import Engine, RunStatus, parse_flow_spec, validate_flow
from .media import (
    Artifact,
    AudioBuf,
    ImageBuf,
    Modality,
    parse_image_ppm,
    parse_wav,
    read_video_dir,
    write_image_ppm,
    write_video_dir,
    write_wav,
)
from .registry import NotFound, Registry, RegistrationContext
from .store import EmptySegment


class CliError(Exception):
    pass


def load_payload(path: str):
    p = Path(path)
    if p.is_dir():
        if not (p / "meta.json").exists():
            raise CliError(f"{path}: video directory needs meta.json")
        return read_video_dir(p)
    if not p.exists():
        raise CliError(f"{path}: no such file")
    suffix = p.suffix.lower()
    if suffix in (".txt", ".md", ""):
        return p.read_text(encoding="utf-8")
    if suffix == ".ppm":
        return parse_image_ppm(p.read_bytes())
    if suffix == ".wav":
        return parse_wav(p.read_bytes())
    raise CliError(f"{path}: unsupported extension {suffix!r} (txt/ppm/wav or video dir)")


def save_payload(payload, base: Path) -> Path:
    if isinstance(payload, str):
        out = base.with_suffix(".txt")
        out.write_text(payload, encoding="utf-8")
    elif isinstance(payload, ImageBuf):
        out = base.with_suffix(".ppm")
        out.write_bytes(write_image_ppm(payload))
    elif isinstance(payload, AudioBuf):
        out = base.with_suffix(".wav")
        out.write_bytes(write_wav(payload))
    else:
        out = base
        write_video_dir(payload, out)
    return out


def make_context(args, run_id=None, stage_kind=None) -> RegistrationContext:
    return RegistrationContext(
        device=getattr(args, "device", "cli") or "cli",
        ip=getattr(args, "ip", "127.0.0.1") or "127.0.0.1",
        user_account=args.user,
        timestamp=int(time.time()),
        flow_run_id=run_id,
        stage_kind=stage_kind,
    )


def cmd_flow_validate(args) -> int:
    spec = parse_flow_spec(Path(args.file).read_text(encoding="utf-8"))
    report = validate_flow(spec)
    if not report:
        print(f"{spec.name}: ok ({len(spec.nodes)} nodes)")
        return 0
    for issue in report:
        print(f"{issue.kind}: {issue.message}", file=sys.stderr)
    return 1


def _parse_assignments(pairs, what):
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise CliError(f"{what} {pair!r} must be key=value")
        key, value = pair.split("=", 1)
        out[key] = value
    return out


def _edit_payload(node_id: str, pending: Artifact, args, edit_files: dict):
    if node_id in edit_files:
        return load_payload(edit_files[node_id])
    if not args.edit:
        return pending.payload  # identity edit keeps unattended runs moving
    if pending.modality is Modality.TEXT:
        print(f"--- checkpoint {node_id} (text) ---")
        print(pending.payload)
        line = input(f"replacement for {node_id} (empty keeps it): ")
        return line if line else pending.payload
    print(f"--- checkpoint {node_id} ({pending.modality.value}) ---")
    line = input(f"path of replacement for {node_id} (empty keeps it): ")
    return load_payload(line) if line else pending.payload


def cmd_flow_run(args) -> int:
    spec = parse_flow_spec(Path(args.file).read_text(encoding="utf-8"))
    report = validate_flow(spec)
    if report:
        for issue in report:
            print(f"{issue.kind}: {issue.message}", file=sys.stderr)
        return 1
    assignments = _parse_assignments(args.input, "--input")
    inputs = {}
    for key, path in assignments.items():
        if "." not in key:
            raise CliError(f"--input key {key!r} must be node.port")
        node, port = key.split(".", 1)
        inputs[(node, port)] = Artifact.new(load_payload(path))
    edit_files = _parse_assignments(args.edit_file, "--edit-file")

    engine = Engine(default_registry())
    run = engine.start_run(spec, inputs)
    while run.status is RunStatus.AWAITING_EDIT:
        node_id = run.awaiting_node
        payload = _edit_payload(node_id, run.pending[node_id], args, edit_files)
        run = engine.submit_checkpoint_edit(run.run_id, node_id, Artifact.new(payload))
    if run.status is not RunStatus.COMPLETED:
        print(f"run failed: {run.failure}", file=sys.stderr)
        return 1

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    registry = Registry.open(args.data_dir) if args.register else None
    for node_id, artifact in sorted(run.outputs().items()):
        written = save_payload(artifact.payload, out_dir / node_id)
        line = f"{node_id}: {written}"
        if registry is not None:
            record = registry.register(
                artifact,
                make_context(args, run_id=run.run_id, stage_kind=artifact.stage_kind),
                flow_name=spec.name,
            )
            line += f"  {record.uri}"
        print(line)
    if registry is not None:
        registry.close()
    return 0


def cmd_registry_register(args) -> int:
    artifact = Artifact.new(load_payload(args.path))
    registry = Registry.open(args.data_dir)
    record = registry.register(artifact, make_context(args), note=args.note or "")
    registry.close()
    print(record.uri)
    return 0


def cmd_registry_search(args) -> int:
    artifact = Artifact.new(load_payload(args.path))
    registry = Registry.open(args.data_dir)
    try:
        result = registry.store.topk(embed_artifact(artifact), k=args.k, workers=args.workers)
    except EmptySegment:
        print(f"registry has no {artifact.modality.value} entries", file=sys.stderr)
        return 1
    for uri, score in result.hits:
        print(f"{score:.6f}  {uri}")
    return 0


def cmd_registry_lookup(args) -> int:
    registry = Registry.open(args.data_dir)
    try:
        record = registry.lookup(args.uri)
    except NotFound:
        print(f"no record for {args.uri}", file=sys.stderr)
        return 1
    print(record.to_line())
    return 0


def cmd_demo(args) -> int:
    if args.which == "fig5":
        report = fig_image_experiment(n=args.n, m=args.m, seed=args.seed)
    else:
        report = fig_text_experiment(n=args.n, m=args.m, seed=args.seed)
    Path(args.out).write_text(report.to_csv(), encoding="utf-8")
    centroid = report.noise_centroid_closer_to_positive()
    print(
        f"{args.which}: accuracy={report.accuracy:.3f} "
        f"({report.n_correct}/{report.n_queries}), noise-centroid-near-positive={centroid}, "
        f"report -> {args.out}"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    endpoints = _parse_assignments(args.endpoint, "--endpoint")
    ui_dir = Path(args.ui_dir) if args.ui_dir else None
    app = create_app(
        ServiceConfig(
            data_dir=Path(args.data_dir),
            default_user=args.user,
            backend_endpoints=endpoints,
            ui_dir=ui_dir,
        )
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modalflow")
    sub = parser.add_subparsers(dest="command", required=True)

    flow = sub.add_parser("flow", help="validate and run flow documents")
    flow_sub = flow.add_subparsers(dest="flow_command", required=True)
    v = flow_sub.add_parser("validate", help="type-check a flow document")
    v.add_argument("file")
    v.set_defaults(func=cmd_flow_validate)
    r = flow_sub.add_parser("run", help="execute a flow with mock backends")
    r.add_argument("file")
    r.add_argument("--input", action="append", metavar="NODE.PORT=PATH")
    r.add_argument("--edit", action="store_true", help="prompt at checkpoints")
    r.add_argument("--edit-file", action="append", metavar="NODE=PATH")
    r.add_argument("--out-dir", default="out")
    r.add_argument("--register", action="store_true", help="register outputs")
    r.add_argument("--user", default="anonymous")
    r.add_argument("--data-dir", default="maid-data")
    r.set_defaults(func=cmd_flow_run)

    registry = sub.add_parser("registry", help="register and retrieve outputs")
    reg_sub = registry.add_subparsers(dest="registry_command", required=True)
    rr = reg_sub.add_parser("register", help="register one artifact file")
    rr.add_argument("path")
    rr.add_argument("--user", required=True)
    rr.add_argument("--data-dir", default="maid-data")
    rr.add_argument("--device", default="cli")
    rr.add_argument("--ip", default="127.0.0.1")
    rr.add_argument("--note", default="")
    rr.set_defaults(func=cmd_registry_register)
    rs = reg_sub.add_parser("search", help="fuzzy-search the registry")
    rs.add_argument("path")
    rs.add_argument("-k", type=int, default=5)
    rs.add_argument("--workers", type=int, default=1)
    rs.add_argument("--data-dir", default="maid-data")
    rs.set_defaults(func=cmd_registry_search)
    rl = reg_sub.add_parser("lookup", help="exact URI lookup")
    rl.add_argument("uri")
    rl.add_argument("--data-dir", default="maid-data")
    rl.set_defaults(func=cmd_registry_lookup)

    demo = sub.add_parser("demo", help="perturbation-retrieval reports")
    demo.add_argument("which", choices=["fig5", "fig6"])
    demo.add_argument("--out", default="report.csv")
    demo.add_argument("--n", type=int, default=50)
    demo.add_argument("--m", type=int, default=50)
    demo.add_argument("--seed", type=int, default=0)
    demo.set_defaults(func=cmd_demo)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--data-dir", default="maid-data")
    serve.add_argument("--user", default="anonymous")
    serve.add_argument("--endpoint", action="append", metavar="NAME=URL")
    serve.add_argument("--ui-dir", default="frontend/dist", help="static UI bundle")
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except Exception as exc:  # surface module errors as clean messages
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
