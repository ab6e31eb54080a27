import json
import os
import pathlib

import pytest

import mindtrail

ROOT = pathlib.Path(os.environ.get("MINDTRAIL_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


def test_syllables():
    assert mindtrail.count_syllables("안녕하세요") == 5
    assert mindtrail.count_syllables("") == 0
    assert mindtrail.count_syllables("Hello 세계!") == 2


def test_pathways():
    assert mindtrail.score_pathways([8, 8, 8, 8]) == 32
    assert mindtrail.pathways_delta([3, 2, 3, 2], [5, 6, 5, 6]) == 12
    with pytest.raises(mindtrail.MindtrailError) as err:
        mindtrail.score_pathways([0, 1, 1, 1])
    assert err.value.code == "OutOfRangeItem"


def test_aggregate_theme_row():
    stats = mindtrail.aggregate([7, 3, 2, 2, 9, 5, 5, 5, 6, 4, 3, 4, 5, 6, 4, 11, 3, 4, 5])
    assert round(stats["mean"], 2) == 4.89
    assert round(stats["sample_sd"], 2) == 2.26


def test_replay_p7():
    script = json.loads((ROOT / "traces" / "p7_like.json").read_text(encoding="utf-8"))
    out = mindtrail.replay(script)
    row = out["row"]
    assert (row["theme_count"], row["question_count"]) == (5, 15)
    assert (row["revealed_keyword_count"], row["user_comment_request_count"]) == (29, 18)
    assert mindtrail.validate_export(json.dumps(out["export"])) == []


def test_timeline():
    events = [
        {"timestamp": 0, "kind": "page_enter", "payload": {"page": "narrative"}},
        {"timestamp": 300, "kind": "page_enter", "payload": {"page": "exploration"}},
        {"timestamp": 1800, "kind": "page_enter", "payload": {"page": "summary"}},
        {"timestamp": 2100, "kind": "answer_updated", "payload": {"question_id": "q1"}},
    ]
    segs = mindtrail.phase_timeline(events)["segments"]
    assert [(s["phase"], s["start"], s["end"]) for s in segs] == [
        ("narrative", 0, 300),
        ("exploration", 300, 1800),
        ("summary", 1800, 2100),
    ]


def test_service_round_trip():
    svc = mindtrail.Service(seed=7)
    s = svc.create_session("I retired last year. The days feel long. Nobody asks for my opinion now.", "en")
    suggestions = svc.suggest_themes(s["id"], 2)
    assert all(sug["quote"] in s["narrative"] for sug in suggestions)
    theme = svc.activate_theme(s["id"], suggestions[0])
    cands = svc.suggest_questions(s["id"], theme["id"])
    q = svc.select_question(s["id"], theme["id"], cands[0]["text"], cands[0]["intention"])
    svc.wait_idle()
    svc.update_answer(s["id"], q["id"], "Mornings are hard.")
    svc.request_keywords(s["id"], q["id"])
    svc.request_comment(s["id"], q["id"])
    assert svc.request_summary(s["id"])["text"]
    usage = svc.usage(s["id"])
    assert usage["theme_count"] == 1 and usage["user_comment_request_count"] == 1
    assert mindtrail.validate_export(json.dumps(svc.export(s["id"]))) == []
    with pytest.raises(mindtrail.MindtrailError) as err:
        svc.create_session("   ")
    assert err.value.code == "EmptyNarrative"
