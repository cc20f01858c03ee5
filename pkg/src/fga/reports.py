"""Run envelopes: every emitted report carries enough to replay it bit for bit.

An envelope wraps one command's output with the tool version, the resolved
configuration, a digest per input file, and the seed (null for deterministic
commands).  JSON output is canonical: keys sorted, two-space indent, one
trailing newline, so identical runs are byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def input_digests(paths: Iterable[str | Path]) -> list[dict[str, str]]:
    return [{"path": str(p), "sha256": file_digest(p)} for p in paths]


def envelope(
    command: str,
    config: dict[str, Any],
    inputs: Iterable[str | Path],
    report: dict[str, Any],
    seed: int | None = None,
) -> dict[str, Any]:
    from fga import __version__  # deferred: this module loads before the package root

    return {
        "tool": "fga",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": input_digests(inputs),
        "seed": seed,
        "report": report,
    }


def to_json(data: dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"
