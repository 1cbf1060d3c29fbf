"""Canonical JSON used by checkpoints, archives, configs and the wire protocol.

Keys are sorted, separators are compact and floats use the shortest representation
that round-trips a 64-bit float, so equal documents always produce equal bytes.
"""

import json
from pathlib import Path
from typing import Any, Union

from pydantic import BaseModel


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    return obj


def canonical_dumps(obj: Any, *, indent: bool = False) -> str:
    """Serialize ``obj`` deterministically; NaN and infinities are rejected."""
    return json.dumps(
        to_jsonable(obj),
        sort_keys=True,
        separators=(",", ": ") if indent else (",", ":"),
        indent=2 if indent else None,
        allow_nan=False,
        ensure_ascii=False,
    )


def write_canonical(path: Union[str, Path], obj: Any) -> Path:
    """Write a canonical JSON document, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_dumps(obj, indent=True) + "\n", encoding="utf-8")
    return path


def read_json(path: Union[str, Path]) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
