import json
import random
import socket
from pathlib import Path

import pytest

import synth
from corefmask.cli import main, score_paths
from corefmask.conllu import write_conllu
from corefmask.framing import FramingConfig, frame_document
from corefmask.instructions import InstructionSpec, render_instruction

FIXTURES = Path(__file__).parent / "fixtures"
SMALL = ["--frame-budget", "30", "--tuple-budget", "200"]


@pytest.fixture
def corpus(tmp_path):
    rng = random.Random(5)
    docs = [synth.random_document(rng, rng.randint(1, 6), contiguous=True, doc_id=f"d{i}") for i in range(4)]
    path = tmp_path / "gold.conllu"
    write_conllu(path, docs)
    return path, docs


def test_export_train_counts(corpus, tmp_path, capsys):
    path, docs = corpus
    out = tmp_path / "train.jsonl"
    assert main(["export-train", str(path), "--out", str(out), *SMALL]) == 0
    instruction = render_instruction(InstructionSpec())
    expected = sum(max(1, len(frame_document(d, instruction, FramingConfig(30, 200)).frames) - 1) for d in docs)
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == expected
    assert all(set(json.loads(line)) == {"instruction", "input", "output"} for line in lines)


def test_export_train_empty_corpus(tmp_path):
    src = tmp_path / "empty.conllu"
    src.write_text("", encoding="utf-8")
    out = tmp_path / "train.jsonl"
    assert main(["export-train", str(src), "--out", str(out)]) == 0
    assert out.read_text() == ""


def test_export_rejects_bad_budgets(corpus, tmp_path, capsys):
    path, _ = corpus
    code = main(["export-train", str(path), "--out", str(tmp_path / "x"), "--frame-budget", "100", "--tuple-budget", "100"])
    assert code == 1
    assert "tuple budget" in capsys.readouterr().err


def test_infer_oracle_and_score_identity(corpus, tmp_path, capsys):
    path, _ = corpus
    out = tmp_path / "resp.conllu"
    assert main(["infer", str(path), "--out", str(out), *SMALL]) == 0
    assert Path(str(out) + ".diagnostics.jsonl").exists()
    rows, _ = score_paths(path, out)
    assert rows[-1]["doc"] == "*" and rows[-1]["conll"] == 1.0


def _replay_script(path, n):
    path.write_text("\n".join(["0", "1", '" 0"'] * n) + "\n", encoding="utf-8")


def test_replay_is_deterministic(corpus, tmp_path):
    path, _ = corpus
    script = tmp_path / "script.txt"
    _replay_script(script, 200)
    outputs = []
    for run in range(2):
        out = tmp_path / f"run{run}.conllu"
        assert main(["infer", str(path), "--out", str(out), "--backend", f"replay:{script}", "--jobs", "4", *SMALL]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_unreachable_remote_fails(corpus, tmp_path, capsys):
    path, _ = corpus
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    code = main(["infer", str(path), "--out", str(tmp_path / "r.conllu"), "--backend",
                 f"remote:http://127.0.0.1:{port}/v1", "--timeout", "1", *SMALL])
    assert code != 0
    assert "backend failed" in capsys.readouterr().err


def test_unknown_backend(corpus, tmp_path, capsys):
    path, _ = corpus
    assert main(["infer", str(path), "--out", str(tmp_path / "r"), "--backend", "magic"]) == 1


def test_missing_input_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["score", str(tmp_path / "nope.conllu"), str(tmp_path / "nope2.conllu")])
    assert info.value.code == 2


def test_score_fixture_pair(tmp_path, capsys):
    key, response = FIXTURES / "metric_key.conllu", FIXTURES / "metric_response.conllu"
    assert main(["score", str(key), str(response), "--out", str(tmp_path)]) == 0
    table = capsys.readouterr().out
    assert "CoNLL" in table and "73.33" in table
    records = [json.loads(line) for line in (tmp_path / "scores.jsonl").read_text().splitlines()]
    assert records[-1]["conll"] == pytest.approx(11 / 15, abs=1e-9)
    assert (tmp_path / "scores.tsv").read_text().splitlines()[0].split("\t")[:2] == ["dataset", "doc"]
    assert (tmp_path / "scores.png").stat().st_size > 0


def test_score_directories_macro_average(tmp_path):
    key_dir, resp_dir = tmp_path / "key", tmp_path / "resp"
    key_dir.mkdir()
    resp_dir.mkdir()
    for name, response in [("a.conllu", "metric_response.conllu"), ("b.conllu", "metric_key.conllu")]:
        (key_dir / name).write_bytes((FIXTURES / "metric_key.conllu").read_bytes())
        (resp_dir / name).write_bytes((FIXTURES / response).read_bytes())
    rows, _ = score_paths(key_dir, resp_dir, tmp_path / "out", plot=False)
    assert rows[-1]["dataset"] == "macro-avg"
    assert rows[-1]["conll"] == pytest.approx((11 / 15 + 1) / 2, abs=1e-9)
    assert not (tmp_path / "out" / "scores.png").exists()


def test_env_defaults(corpus, tmp_path, monkeypatch):
    path, docs = corpus
    monkeypatch.setenv("COREF_FRAME_BUDGET", "30")
    monkeypatch.setenv("COREF_TUPLE_BUDGET", "200")
    monkeypatch.setenv("COREF_OUT", str(tmp_path / "env.jsonl"))
    assert main(["export-train", str(path)]) == 0
    count = len((tmp_path / "env.jsonl").read_text().splitlines())
    instruction = render_instruction(InstructionSpec())
    assert count == sum(max(1, len(frame_document(d, instruction, FramingConfig(30, 200)).frames) - 1) for d in docs)


def test_pipeline_writes_response_and_scores(corpus, tmp_path, capsys):
    path, _ = corpus
    out = tmp_path / "run"
    assert main(["pipeline", str(path), "--out", str(out), *SMALL]) == 0
    assert (out / "response" / path.name).exists()
    assert {p.name for p in out.iterdir()} >= {"scores.tsv", "scores.jsonl", "scores.png"}
