"""Artifact writing with embedded provenance, and config recovery from artifacts.

JSON floats are written with Python's shortest round-trip ``repr`` so values
survive a write/read cycle bit for bit. CSV floats use 17 significant digits.
Every artifact carries a ``provenance`` block whose ``config`` entry is a
complete, re-runnable set of command options.
"""

from __future__ import annotations

import json
import math
import re
from typing import Any, Iterable, List, Sequence

import numpy as np

from . import __version__

TOOL = "bkp-stability"
CSV_PROVENANCE_PREFIX = "# provenance "


def provenance(command: str, config: dict) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command, "config": dict(sorted(config.items()))}


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def dumps_json(payload: dict) -> str:
    return json.dumps(_plain(payload), indent=1, sort_keys=True) + "\n"


def fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def dumps_csv(prov: dict, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines: List[str] = [CSV_PROVENANCE_PREFIX + json.dumps(_plain(prov), sort_keys=True), ",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(v).replace(",", ";") for v in row))
    return "\n".join(lines) + "\n"


def svg_metadata(prov: dict) -> str:
    body = json.dumps(_plain(prov), sort_keys=True).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    return f"<metadata>{body}</metadata>"


def config_from_artifact(text: str) -> dict:
    """Recover the embedded run configuration from a JSON, CSV or SVG artifact."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return dict(json.loads(stripped)["provenance"]["config"])
    if stripped.startswith(CSV_PROVENANCE_PREFIX):
        first = stripped.splitlines()[0][len(CSV_PROVENANCE_PREFIX) :]
        return dict(json.loads(first)["config"])
    m = re.search(r"<metadata>(.*?)</metadata>", stripped, re.S)
    if m:
        body = m.group(1).replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
        return dict(json.loads(body)["config"])
    raise ValueError("no embedded provenance found")


def parse_key_value(text: str) -> dict:
    """Flat ``key = value`` config; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def load_config(text: str) -> dict:
    stripped = text.lstrip()
    if stripped.startswith(("{", CSV_PROVENANCE_PREFIX, "<")):
        return config_from_artifact(text)
    return parse_key_value(text)
