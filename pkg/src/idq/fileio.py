"""Versioned JSON channel files and instance digests.

Floats are written with ``repr`` (Python's shortest round-trip form), so a
write followed by a read gives back the same float64 values bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import JointDistribution

FORMAT_VERSION = 1


class ChannelFileError(ValueError):
    """Malformed channel file. ``where`` is a field path or ``line L, column C``."""

    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}")
        self.where = where


@dataclass
class ChannelFile:
    joint: JointDistribution
    x_labels: list[str] | None = None
    y_labels: list[str] | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "version": FORMAT_VERSION,
            "px": [float(v) for v in self.joint.px],
            "channel": [[float(v) for v in row] for row in self.joint.channel],
        }
        if self.x_labels is not None:
            out["x_labels"] = list(self.x_labels)
        if self.y_labels is not None:
            out["y_labels"] = list(self.y_labels)
        if self.meta:
            out["meta"] = self.meta
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ChannelFileError(where, f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise ChannelFileError(where, "must be finite")
    return float(v)


def _labels(obj: dict, key: str, size: int) -> list[str] | None:
    if key not in obj:
        return None
    val = obj[key]
    if not isinstance(val, list) or not all(isinstance(s, str) for s in val):
        raise ChannelFileError(key, "expected a list of strings")
    if len(val) != size:
        raise ChannelFileError(key, f"has {len(val)} entries, expected {size}")
    return val


def from_dict(obj) -> ChannelFile:
    if not isinstance(obj, dict):
        raise ChannelFileError("<root>", "expected a JSON object")
    if "version" not in obj:
        raise ChannelFileError("version", "missing required field")
    if obj["version"] != FORMAT_VERSION:
        raise ChannelFileError("version", f"unsupported version {obj['version']!r}")
    for key in ("px", "channel"):
        if key not in obj:
            raise ChannelFileError(key, "missing required field")
    if not isinstance(obj["px"], list):
        raise ChannelFileError("px", "expected a list")
    px = [_number(v, f"px[{i}]") for i, v in enumerate(obj["px"])]
    rows = obj["channel"]
    if not isinstance(rows, list) or len(rows) != len(px):
        raise ChannelFileError("channel", f"expected a list of {len(px)} rows")
    width = None
    ch = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise ChannelFileError(f"channel[{i}]", "expected a list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ChannelFileError(f"channel[{i}]", f"has {len(row)} entries, expected {width}")
        ch.append([_number(v, f"channel[{i}][{k}]") for k, v in enumerate(row)])
    if abs(sum(px) - 1.0) > 1e-12 or any(v < 0 for v in px):
        raise ChannelFileError("px", "must be nonnegative and sum to 1")
    for i, row in enumerate(ch):
        if any(v < 0 for v in row) or abs(sum(row) - 1.0) > 1e-10:
            raise ChannelFileError(f"channel[{i}]", "must be nonnegative and sum to 1")
    try:
        joint = JointDistribution(np.array(px), np.array(ch))
    except ValueError as exc:
        raise ChannelFileError("<root>", str(exc)) from None
    meta = obj.get("meta", {})
    if not isinstance(meta, dict):
        raise ChannelFileError("meta", "expected an object")
    return ChannelFile(
        joint, _labels(obj, "x_labels", joint.K), _labels(obj, "y_labels", joint.N), meta
    )


def loads(text: str) -> ChannelFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return from_dict(obj)


def read_channel_file(path) -> ChannelFile:
    return loads(Path(path).read_text(encoding="utf-8"))


def write_channel_file(path, cf: ChannelFile) -> None:
    Path(path).write_text(cf.dumps(), encoding="utf-8", newline="\n")


def digest(j: JointDistribution) -> str:
    """sha256 over K, N and the little-endian float64 bytes of px and channel."""
    h = hashlib.sha256()
    h.update(np.array([j.K, j.N], dtype="<i8").tobytes())
    h.update(np.ascontiguousarray(j.px, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(j.channel, dtype="<f8").tobytes())
    return h.hexdigest()
