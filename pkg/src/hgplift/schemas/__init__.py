"""Published JSON schemas for every document the CLI writes."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema

NAMES = ("base_report", "code_params", "verify_report", "solution", "audit", "fer_results", "error")


@lru_cache(maxsize=None)
def load(name: str) -> dict[str, Any]:
    if name not in NAMES:
        raise KeyError(f"unknown schema {name!r}")
    text = (resources.files(__name__) / f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(doc: Any, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` when ``doc`` does not match."""
    jsonschema.validate(doc, load(name))
