import hashlib
import json
from typing import Any, Mapping


def canonical_json(payload: Mapping[str, Any]) -> str:
    """Serialize a mapping with sorted keys and no insignificant whitespace."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def generate_hash(payload: Mapping[str, Any]) -> str:
    """MD5 of the canonical JSON form of a mapping.

    Args:
        payload: JSON-serializable mapping, e.g. a merged run configuration.

    Returns:
        str: Hex digest, independent of key order.
    """
    return hashlib.md5(canonical_json(payload).encode()).hexdigest()
