"""Bundled demo inputs: paths to the graphs, maps, and systems shipped in-repo.

The corpus holds the Fibonacci map as a non-hyperbolic control, a rank-3
candidate-hyperbolic pair glued through two degree-2 markings, and one
deliberately failing system per validator error.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def demo_names() -> tuple[str, ...]:
    root = resources.files("fga.data")
    return tuple(
        sorted(p.name for p in root.iterdir() if p.is_file() and not p.name.endswith(".py"))
    )


def demo_path(name: str) -> Path:
    """Filesystem path of one bundled file, e.g. ``demo_path("demo.system")``."""
    target = resources.files("fga.data") / name
    if not target.is_file():
        raise FileNotFoundError(f"no demo file {name!r}; shipped: {', '.join(demo_names())}")
    with resources.as_file(target) as real:
        return Path(real)
