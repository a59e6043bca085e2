"""Seeded point sampling on the surface models."""

from __future__ import annotations

import math

import numpy as np

from .surfaces import AnticanonicalSection, ChartPoint, KstarMetric, section_norm_sq


def random_points(
    section: AnticanonicalSection,
    metric: KstarMetric,
    n: int,
    rng: np.random.Generator,
    min_sigma: float = 0.0,
    box: float = 1.2,
    chart: int | None = None,
) -> list:
    """n points with coordinates uniform in the chart box, rejecting
    points with ||sigma|| below min_sigma. Deterministic for a given rng."""
    model = section.model
    pts = []
    guard = 0
    while len(pts) < n:
        guard += 1
        if guard > 200 * n + 200:
            raise RuntimeError("rejection sampling failed; min_sigma too large?")
        c = int(rng.integers(0, model.n_charts)) if chart is None else chart
        v = rng.uniform(-box, box, 4)
        p = ChartPoint(c, (complex(v[0], v[1]), complex(v[2], v[3])))
        if min_sigma > 0.0 and math.sqrt(section_norm_sq(section, metric, p)) < min_sigma:
            continue
        pts.append(p)
    return pts
