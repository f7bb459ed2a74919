#!/usr/bin/env python3
"""End-to-end movie-material walkthrough on the bundled image->story->AV flow.

Runs the pipeline with a scripted checkpoint edit, registers the text, audio,
and video outputs, then demonstrates fuzzy retrieval of the edited story.
"""
import argparse
import random
import time
from pathlib import Path

from modalflow.backends import default_registry
from modalflow.experiments import shuffle_sentences
from modalflow.fingerprints import embed_artifact
from modalflow.flowdocs import bundled_flow_doc
from modalflow.flows import Engine, RunStatus, parse_flow_spec
from modalflow.media import Artifact
from modalflow.mocks import mock_text_to_image
from modalflow.registry import Registry, RegistrationContext


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default="movie-data")
    parser.add_argument("--user", default="director")
    args = parser.parse_args()

    engine = Engine(default_registry())
    spec = parse_flow_spec(bundled_flow_doc("image-story-av"))
    poster = Artifact.new(mock_text_to_image("harbor at dusk, lanterns", seed=42))
    run = engine.start_run(spec, {("caption", "in"): poster})
    assert run.status is RunStatus.AWAITING_EDIT

    draft = run.pending["story"].payload
    print("--- machine draft ---")
    print(draft)
    edited = draft + " the director kept the last line and cut the rest."
    run = engine.submit_checkpoint_edit(run.run_id, "story", Artifact.new(edited))
    assert run.status is RunStatus.COMPLETED
    print("--- after manual edit, run completed ---")

    ctx = RegistrationContext(
        device="script",
        ip="127.0.0.1",
        user_account=args.user,
        timestamp=int(time.time()),
        flow_run_id=run.run_id,
    )
    registry = Registry.open(Path(args.data_dir))
    for node_id, artifact in sorted(run.outputs().items()):
        record = registry.register(artifact, ctx, flow_name=spec.name)
        print(f"{node_id:10s} {artifact.modality.value:5s} -> {record.uri}")

    story = run.outputs()["story"]
    scrambled = shuffle_sentences(story.payload, random.Random(0))
    hits = registry.store.topk(embed_artifact(Artifact.new(scrambled)), k=3)
    print("--- retrieval of the sentence-scrambled story ---")
    for uri, score in hits.hits:
        print(f"{score:.4f}  {uri}")
    registry.close()


if __name__ == "__main__":
    main()
