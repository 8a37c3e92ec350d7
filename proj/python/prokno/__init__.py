"""Python bindings for the prokno engine.

Inputs are Python objects or JSON strings; results come back as plain dicts.
"""

import json

from . import _prokno
from ._prokno import Error

__all__ = [
    "Error",
    "classify",
    "entail",
    "evaluate",
    "explain",
    "logical",
    "rank",
    "recommend",
    "risk",
    "semantic",
    "unsafe",
    "validate",
    "walk",
]


def _text(value):
    return value if isinstance(value, str) else json.dumps(value)


def _jsonl(values):
    if isinstance(values, str):
        return values
    return "\n".join(json.dumps(v) for v in values)


def validate(document):
    return json.loads(_prokno.validate(_text(document)))


def classify(document, lexicon, text):
    return json.loads(_prokno.classify(_text(document), _text(lexicon), text))


def walk(document, answers):
    """Replays answers from the root and returns the explanation trace."""
    return json.loads(_prokno.walk(_text(document), [str(a) for a in answers]))


def unsafe(log, lexicon, concepts=None):
    return json.loads(_prokno.unsafe(_text(log), _text(lexicon), concepts or {}))


def risk(samples, benefit_denominator="verbatim"):
    return json.loads(_prokno.risk(_jsonl(samples), benefit_denominator))


def semantic(log, threshold=0.5):
    return json.loads(_prokno.semantic(_text(log), threshold))


def logical(log, theta_e=0.6, theta_n=0.3, theta_c=0.5):
    return json.loads(_prokno.logical(_text(log), theta_e, theta_n, theta_c))


def entail(premise, hypothesis):
    return json.loads(_prokno.entail(premise, hypothesis))


def rank(candidates, history=()):
    return json.loads(_prokno.rank(_jsonl(candidates), _jsonl(list(history))))


def evaluate(recipe, actions, dietary, condition="", limits=None):
    return json.loads(_prokno.evaluate(_text(recipe), condition, _text(actions), _text(dietary), _text(limits or {})))


def recommend(recipes, actions, dietary, profile=None):
    return json.loads(_prokno.recommend(_jsonl(recipes), _text(profile), _text(actions), _text(dietary)))


def explain(phrases, kg, theta_anchor=0.6, theta_stop=0.8, max_depth=6):
    return json.loads(_prokno.explain(list(phrases), _text(kg), theta_anchor, theta_stop, max_depth))
