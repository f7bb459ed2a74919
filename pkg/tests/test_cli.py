import json

import pytest

from modalflow.cli import main
from modalflow.flowdocs import bundled_flow_doc
from modalflow.media import parse_image_ppm, parse_wav, write_image_ppm
from modalflow.mocks import mock_text_to_image


@pytest.fixture()
def flow1(tmp_path):
    p = tmp_path / "flow1.json"
    p.write_text(bundled_flow_doc("text-image-style"))
    return p


@pytest.fixture()
def flow2(tmp_path):
    p = tmp_path / "flow2.json"
    p.write_text(bundled_flow_doc("image-story-av"))
    return p


@pytest.fixture()
def style_ppm(tmp_path):
    p = tmp_path / "style.ppm"
    p.write_bytes(write_image_ppm(mock_text_to_image("night sky", seed=3)))
    return p


def test_validate_bundled_flow(flow1):
    assert main(["flow", "validate", str(flow1)]) == 0


def test_validate_broken_flow(tmp_path, capsys):
    doc = {
        "name": "bad",
        "nodes": [{"id": "a", "kind": "Tts"}, {"id": "b", "kind": "TextToImage"}],
        "edges": [["a", "out", "b", "in"]],
        "inputs": [["a", "in", "text"]],
        "outputs": ["b"],
    }
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    assert main(["flow", "validate", str(p)]) == 1
    assert "ModalityMismatch" in capsys.readouterr().err


def test_run_missing_input_fails(flow1, tmp_path):
    assert (
        main(
            [
                "flow",
                "run",
                str(flow1),
                "--out-dir",
                str(tmp_path / "out"),
            ]
        )
        != 0
    )


def test_run_flow1_with_inputs(flow1, style_ppm, tmp_path, capsys):
    prompt = tmp_path / "prompt.txt"
    prompt.write_text("a city folded like paper")
    rc = main(
        [
            "flow",
            "run",
            str(flow1),
            "--input",
            f"draft.in={prompt}",
            "--input",
            f"styled.style={style_ppm}",
            "--out-dir",
            str(tmp_path / "out"),
        ]
    )
    assert rc == 0
    out = tmp_path / "out" / "styled.ppm"
    assert out.exists()
    parse_image_ppm(out.read_bytes())  # decodes cleanly


def test_run_flow2_with_edit_file_and_register(flow2, style_ppm, tmp_path):
    edit = tmp_path / "edit.txt"
    edit.write_text("a harbor where machines learned to sing")
    rc = main(
        [
            "flow",
            "run",
            str(flow2),
            "--input",
            f"caption.in={style_ppm}",
            "--edit-file",
            f"story={edit}",
            "--out-dir",
            str(tmp_path / "out"),
            "--register",
            "--user",
            "casey",
            "--data-dir",
            str(tmp_path / "reg"),
        ]
    )
    assert rc == 0
    assert (tmp_path / "out" / "story.txt").read_text() == edit.read_text()
    parse_wav((tmp_path / "out" / "narration.wav").read_bytes())
    assert (tmp_path / "out" / "clip" / "meta.json").exists()
    registry_file = tmp_path / "reg" / "registry.jsonl"
    assert registry_file.exists()
    assert sum(1 for _ in registry_file.open()) == 4  # header + 3 outputs


def test_registry_register_and_search(tmp_path, capsys):
    note = tmp_path / "note.txt"
    note.write_text("the paper lantern festival filled the square")
    data_dir = str(tmp_path / "reg")
    assert main(["registry", "register", str(note), "--user", "ada", "--data-dir", data_dir]) == 0
    uri = capsys.readouterr().out.strip()
    assert uri.startswith("maid://ada/text/")
    assert main(["registry", "search", str(note), "-k", "1", "--data-dir", data_dir]) == 0
    out = capsys.readouterr().out
    assert uri in out
    assert main(["registry", "lookup", uri, "--data-dir", data_dir]) == 0


def test_registry_search_empty(tmp_path, capsys):
    note = tmp_path / "note.txt"
    note.write_text("nothing here yet")
    rc = main(["registry", "search", str(note), "--data-dir", str(tmp_path / "reg")])
    assert rc == 1


def test_demo_fig5_writes_csv(tmp_path, capsys):
    out = tmp_path / "report.csv"
    rc = main(["demo", "fig5", "--out", str(out), "--n", "6", "--m", "6"])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "group,label,x,y,score"
    groups = {line.split(",")[0] for line in lines[1:]}
    assert groups == {"positive", "noise", "negative"}


def test_demo_fig6_writes_csv(tmp_path):
    out = tmp_path / "report.csv"
    rc = main(["demo", "fig6", "--out", str(out), "--n", "5", "--m", "5"])
    assert rc == 0
    assert out.exists()


def test_unreadable_file_is_clean_error(tmp_path, capsys):
    rc = main(["registry", "register", str(tmp_path / "missing.txt"), "--user", "x"])
    assert rc == 2
    assert "no such file" in capsys.readouterr().err
