"""
Helper utilities for qgm
"""

import hashlib
import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np


def hash_string(s: str) -> str:
    """
    Create SHA256 hash of string.

    Args:
        s: String to hash

    Returns:
        Hash hex string (first 16 characters)
    """
    return hashlib.sha256(s.encode()).hexdigest()[:16]


def file_digest(file_path: Union[str, Path]) -> str:
    """
    Full SHA256 digest of a file's bytes.

    Args:
        file_path: Path to file

    Returns:
        "sha256:<hex>" string
    """
    h = hashlib.sha256()
    with open(file_path, 'rb') as f:
        for block in iter(lambda: f.read(65536), b''):
            h.update(block)
    return f"sha256:{h.hexdigest()}"


def canonical_json_dumps(obj: Any) -> str:
    """
    Serialise to JSON with sorted keys and round-trip float repr.

    Identical objects always give identical text, which keeps SampleSet files
    byte-reproducible.
    """
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False, allow_nan=False) + "\n"


def format_fraction(q: Fraction) -> str:
    """Render a rational as "p/q" (or "p" for integers)"""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(value: Union[str, int, Fraction]) -> Fraction:
    """Parse "p/q", "p" or an int into a Fraction in lowest terms"""
    if isinstance(value, bool):
        raise ValueError("boolean is not a rational")
    if isinstance(value, float):
        raise ValueError("float given where an exact rational is required")
    return Fraction(value)


def resolve_seed(seed: Optional[int] = None, default: int = 0) -> int:
    """
    Resolve the effective seed: explicit value, then QGM_SEED, then default.
    """
    if seed is not None:
        return int(seed)
    env = os.environ.get('QGM_SEED')
    if env is not None and env.strip():
        return int(env)
    return int(default)


def derive_rng(seed: int, index: int = 0) -> np.random.Generator:
    """
    Independent generator for item ``index`` of a run seeded with ``seed``.

    Uses SeedSequence spawn keys, so item i gets the same stream no matter how
    many items are drawn or in which order.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))
