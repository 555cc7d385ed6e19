"""Pointer-trace helpers: bundled trace access and the reference generators.

Traces are JSONL files, one pointer message per line:
``{"kind": "pointer", "seq": N, "t": <ns>, "x": ..., "y": ...}``.
The bundled ``cross_a_locus`` trace descends the symmetry axis of the
reference five-bar straight through the direct-kinematics singularity at
(3, sqrt(60)) (where C, P, D become collinear), hitting that point exactly;
replaying it must show 1/kappa_A collapsing and the force saturating at the
envelope.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def bundled_trace_path(name: str) -> Path:
    p = Path(__file__).parent / f"{name}.jsonl"
    if not p.exists():
        available = sorted(q.stem for q in p.parent.glob("*.jsonl"))
        raise FileNotFoundError(f"no bundled trace {name!r}; available: {available}")
    return p


def pointer_line(seq: int, t_ns: int, x: float, y: float) -> str:
    return json.dumps(
        {"kind": "pointer", "seq": seq, "t": t_ns, "x": x, "y": y},
        sort_keys=True, separators=(",", ":"),
    )


def a_locus_crossing_points(x: float = 3.0) -> list[tuple[float, float]]:
    """Descent along the reference model's symmetry axis through y = sqrt(60).

    sqrt(60) appears exactly in the sample list so one tick lands on the
    singular locus itself.
    """
    y_locus = math.sqrt(60.0)
    upper = np.linspace(12.0, y_locus, 520)
    lower = np.linspace(y_locus, 7.0, 160)[1:]
    return [(x, float(y)) for y in np.concatenate([upper, lower])]


def write_trace(points: list[tuple[float, float]], path: str | Path,
                period_ns: int = 1_000_000) -> Path:
    path = Path(path)
    lines = [pointer_line(k + 1, k * period_ns, x, y) for k, (x, y) in enumerate(points)]
    path.write_text("\n".join(lines) + "\n")
    return path
