import pathlib
import threading

import pytest

import dlerl

DATA = pathlib.Path(__file__).resolve().parents[2] / "tests" / "data"

PERFECT = ("<think>x</think><answer>TAMPERED "
           "<|box_start|>0.1000,0.2000,0.5000,0.6000<|box_end|></answer>")
TRUTH = {"id": "t", "modality": "image", "label": "TAMPERED",
         "box": [0.1, 0.2, 0.5, 0.6]}


def test_parse_and_format():
    r = dlerl.parse_response(PERFECT)
    assert r["label"] == "TAMPERED"
    assert r["boxes"] == [[0.1, 0.2, 0.5, 0.6]]
    report = dlerl.check_format("<answer>REAL</answer>")
    assert not report["well_formed"]
    assert report["violations"]
    with pytest.raises(dlerl.Error) as info:
        dlerl.parse_response("<answer>REAL</answer>")
    assert dlerl.error_code(info.value) == "FormatError"


def test_composite_reward_examples():
    assert dlerl.composite_reward(PERFECT, TRUTH)["total"] == 2.8
    real = {"id": "r", "modality": "image", "label": "REAL"}
    assert dlerl.composite_reward("<think>x</think><answer>REAL</answer>",
                                  real)["total"] == 2.65
    assert dlerl.composite_reward("<answer>TAMPERED</answer>", TRUTH)["total"] == 0.0


def test_score_batch_threads():
    texts = [PERFECT, "<answer>x"] * 200
    truths = [TRUTH] * 400
    results = [None] * 4

    def work(k):
        results[k] = dlerl.score_batch(texts, truths)

    threads = [threading.Thread(target=work, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for r in results:
        assert r[:2] == [2.8, 0.0]
        assert len(r) == 400
    with pytest.raises(dlerl.Error):
        dlerl.score_batch(texts, truths[:1])


def test_evaluate_files():
    report = dlerl.evaluate_files(DATA / "responses.jsonl", DATA / "manifest.jsonl")
    assert report["tau"] == 0.5
    names = [m["modality"] for m in report["modalities"]]
    assert names == ["image", "audio", "video", "avth"]
    assert report["modalities"][0]["accuracy"] == pytest.approx(2 / 3)
    with pytest.raises(dlerl.Error) as info:
        dlerl.evaluate_files(DATA / "missing.jsonl", DATA / "manifest.jsonl")
    assert dlerl.error_code(info.value) == "IoError"


def test_build_stage_plans():
    stages = dlerl.build_stage_plans(DATA / "manifest.jsonl", 0.5, seed=1)
    assert [s["new_modality"] for s in stages] == ["audio", "image", "video", "avth"]
    assert stages[1]["counts"] == {"audio": 1, "image": 3}
    assert stages == dlerl.build_stage_plans([DATA / "manifest.jsonl"], 0.5, seed=1)
