"""
Validation of output documents against the schemas shipped in src/schemas.
"""

import json
from functools import lru_cache
from importlib import resources
from typing import Any, Dict

from jsonschema import Draft7Validator

from src.utils.constants import SCHEMA_KINDS
from src.utils.errors import ParseError


@lru_cache(maxsize=None)
def load_schema(kind: str) -> Dict[str, Any]:
    if kind not in SCHEMA_KINDS:
        raise ParseError(f"unknown schema kind {kind!r}; expected one of {SCHEMA_KINDS}")
    text = resources.files('src.schemas').joinpath(f"{kind}.schema.json").read_text(encoding='utf-8')
    return json.loads(text)


def validate_document(doc: Dict[str, Any], kind: str) -> None:
    """
    Raise ParseError listing every violation of the ``kind`` schema.
    """
    validator = Draft7Validator(load_schema(kind))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        problems = [f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}" for e in errors[:10]]
        raise ParseError(f"document does not match the {kind} schema: " + "; ".join(problems),
                         kind=kind, n_errors=len(errors))
