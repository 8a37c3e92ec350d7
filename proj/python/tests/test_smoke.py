import json
import os
from pathlib import Path

import pytest

import prokno

DATA = Path(os.environ.get("PROKNO_DATA", Path(__file__).resolve().parents[2] / "data"))


def load(rel):
    return json.loads((DATA / rel).read_text())


def test_validate_valid_and_mutant():
    assert prokno.validate(load("pk/toy_flow.pk.json"))["ok"] is True
    report = prokno.validate(load("pk_corpus/cycle.pk.json"))
    assert [v["code"] for v in report["violations"]] == ["cycle"]


def test_classify_full_path():
    texts = load("fixtures/classify_texts.json")
    result = prokno.classify(load("pk/toy_flow.pk.json"), load("lexicons/toy_flow.lex.json"), texts["full_path"])
    assert result["status"] == "outcome"
    assert result["outcome"] == "level 5"
    assert result == load("fixtures/classify_golden.json")["full_path"]


def test_walk_flat():
    trace = prokno.walk(load("pk/toy_flat.pk.json"), [1, 2, 0])
    assert trace["outcome"] == "mild"
    assert len(trace["steps"]) == 3


def test_domain_error_carries_code():
    with pytest.raises(prokno.Error) as info:
        prokno.walk(load("pk/toy_flow.pk.json"), ["maybe"])
    assert info.value.args[0] == "DomainError"


def test_risk_fixture():
    samples = (DATA / "fixtures/risk_samples.jsonl").read_text()
    verbatim = prokno.risk(samples)
    assert verbatim["value"]["penalty"] == pytest.approx(1.0, abs=1e-12)
    assert verbatim["value"]["benefit"] == pytest.approx(1.0, abs=1e-12)
    assert prokno.risk(samples, "per_sample")["value"]["benefit"] == pytest.approx(0.75, abs=1e-12)


def test_log_metrics():
    log = load("fixtures/generation_log.json")
    assert prokno.unsafe(log, load("lexicons/harmful.lex.json"))["value"] == pytest.approx(1.0)
    assert 0.0 <= prokno.semantic(log)["value"] <= 1.0
    assert 0.0 <= prokno.logical(log)["value"] <= 1.0


def test_entail_identity():
    assert prokno.entail("do you sleep well", "do you sleep well") == {"relation": "entail", "confidence": 1.0}


def test_rank_rejects_bad_transition():
    history = [{"id": "h", "text": "Do you feel low?", "tag": "YesNo", "rank": 1, "source": "s"}]
    candidates = [
        {"id": "a", "text": "How often?", "tag": "DegreeFrequency", "rank": 1, "source": "s"},
        {"id": "b", "text": "What helps?", "tag": "TreatmentRemedies", "rank": 1, "source": "s"},
    ]
    result = prokno.rank(candidates, history)
    assert [r["candidate"]["id"] for r in result["ranked"]] == ["a"]
    assert [r["candidate"]["id"] for r in result["rejected"]] == ["b"]


def test_food():
    actions = load("rules/food.actions.json")
    dietary = load("rules/food.diet.json")
    recipes = [json.loads(line) for line in (DATA / "fixtures/recipes.jsonl").read_text().splitlines() if line.strip()]
    fries = next(r for r in recipes if r["name"] == "potato fries")
    assert prokno.evaluate(fries, actions, dietary)["overall"] == "flagged"
    rec = prokno.recommend(recipes, actions, dietary, {"condition": "diabetes",
                                                       "limits": {"daily_cho_limit": {"quantity": 45, "unit": "g"}}})
    names = [e["recipe"] for e in rec["recommended"]]
    assert "potato fries" not in names
    assert names


def test_explain_demo_graph():
    tree = prokno.explain(["insomnia"], load("kg/demo.kg.json"))
    assert tree["roots"][0]["phrase"] == "insomnia"
    assert len(tree["nodes"]) > 1
