"""JSON instance documents.

Schema::

    {
      "source": "s",
      "agents": ["a", "b"],
      "edges": [{"u": "s", "v": "a", "cost": 2}, ...],
      "valuations": {"a": 3, "b": "3/2"},
      "reports": {"a": {"edges": [["s", "a"]], "valuation": "5/2"}}   # optional
    }

Numbers are integers or exact strings ("3/2", "0.5"); bare JSON floats are
rejected because they cannot represent the intended rational exactly.
Serialization is deterministic (sorted keys and edge lists), so equal
instances produce byte-identical documents.
"""

from __future__ import annotations

import json

from .model import (AgentReport, Instance, ReportProfile, ValidationError,
                    as_value, edge_key, truthful_profile, value_to_json)


def _number(x, what: str):
    if isinstance(x, float):
        raise ValidationError(
            f"malformed number for {what}: {x!r} (use an int or a string like \"3/2\")")
    return as_value(x)


def _parse_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("document must be a JSON object")
    for field in ("source", "agents", "edges", "valuations"):
        if field not in doc:
            raise ValidationError(f"document is missing the {field!r} field")
    return doc


def parse_instance(text: str) -> Instance:
    """Parse an instance document, ignoring any reports field."""
    doc = _parse_document(text)
    return _instance_from(doc)


def _instance_from(doc: dict) -> Instance:
    agents = doc["agents"]
    if not isinstance(agents, list) or not all(isinstance(a, str) for a in agents):
        raise ValidationError("agents must be a list of labels")
    edges = {}
    if not isinstance(doc["edges"], list):
        raise ValidationError("edges must be a list")
    for item in doc["edges"]:
        if not isinstance(item, dict) or not {"u", "v", "cost"} <= item.keys():
            raise ValidationError(f"malformed edge entry: {item!r}")
        k = edge_key(item["u"], item["v"])
        if k in edges:
            raise ValidationError(f"duplicate edge {k}")
        edges[k] = _number(item["cost"], f"cost of {k}")
    if not isinstance(doc["valuations"], dict):
        raise ValidationError("valuations must be an object")
    valuations = {a: _number(v, f"valuation of {a!r}")
                  for a, v in doc["valuations"].items()}
    return Instance(doc["source"], agents, edges, valuations)


def load_document(text: str) -> tuple[Instance, ReportProfile]:
    """Parse an instance document together with its report profile.

    When the optional reports field is present it overrides the listed
    agents' reports; agents not mentioned report truthfully. Without the
    field the profile is the truthful one.
    """
    doc = _parse_document(text)
    instance = _instance_from(doc)
    profile = truthful_profile(instance)
    raw = doc.get("reports")
    if raw is None:
        return instance, profile
    if not isinstance(raw, dict):
        raise ValidationError("reports must be an object")
    reports = dict(profile.reports)
    for i, entry in raw.items():
        if i not in instance.agents:
            raise ValidationError(f"report for unknown agent {i!r}")
        if not isinstance(entry, dict) or not {"edges", "valuation"} <= entry.keys():
            raise ValidationError(f"malformed report for agent {i!r}")
        try:
            declared = frozenset(edge_key(u, v) for u, v in entry["edges"])
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"malformed edge list in report for {i!r}") from exc
        reports[i] = AgentReport(declared, _number(entry["valuation"],
                                                   f"reported valuation of {i!r}"))
    return instance, ReportProfile(instance, reports)


def serialize_instance(instance: Instance, profile: ReportProfile | None = None) -> str:
    """Deterministic JSON text for an instance (optionally with reports)."""
    doc = {
        "source": instance.source,
        "agents": sorted(instance.agents),
        "edges": [{"u": u, "v": v, "cost": value_to_json(c)}
                  for (u, v), c in sorted(instance.graph.edges().items())],
        "valuations": {a: value_to_json(v)
                       for a, v in sorted(instance.valuations.items())},
    }
    if profile is not None and not profile.is_truthful():
        doc["reports"] = {
            i: {"edges": [list(e) for e in sorted(r.edges)],
                "valuation": value_to_json(r.valuation)}
            for i, r in sorted(profile.reports.items())
            if r.edges != instance.true_edges_of(i) or r.valuation != instance.valuations[i]
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
