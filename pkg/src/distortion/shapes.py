"""Boundary polylines of mapped domains, exported as SVG or CSV."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .domains import Disk, Square
from .errors import ParameterOutOfRange, UnsupportedDomain
from .maps import AnyMap, evaluate_polar

SVG_SCALE = 100.0


@dataclass(frozen=True)
class Polyline:
    r: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    image_x: np.ndarray
    image_y: np.ndarray
    closed: bool


def _trace(m: AnyMap, r, theta, closed: bool) -> Polyline:
    rho, t = evaluate_polar(m, r, theta)
    return Polyline(r, theta, r * np.cos(theta), r * np.sin(theta),
                    rho * np.cos(t), rho * np.sin(t), closed)


def boundary(m: AnyMap, domain, samples: int) -> Polyline:
    """Image of the domain boundary; ``samples`` points per square side or around the disk."""
    if samples < 16:
        raise ParameterOutOfRange(f"need at least 16 samples, got {samples}")
    if isinstance(domain, Disk):
        theta = 2.0 * math.pi * np.arange(samples) / samples
        return _trace(m, np.full(samples, domain.radius), theta, True)
    if isinstance(domain, Square):
        a = domain.half_width
        t = -a + 2.0 * a * np.arange(samples) / samples
        # counter-clockwise from the corner (a, -a), each side excludes its end corner
        x = np.concatenate([np.full(samples, a), -t, np.full(samples, -a), t])
        y = np.concatenate([t, np.full(samples, a), -t, np.full(samples, -a)])
        return _trace(m, np.hypot(x, y), np.arctan2(y, x), True)
    raise UnsupportedDomain(f"shape export supports Disk and Square, got {domain!r}")


def _boundary_radius(domain, theta: float) -> float:
    if isinstance(domain, Disk):
        return domain.radius
    return domain.half_width / max(abs(math.cos(theta)), abs(math.sin(theta)))


def slices(m: AnyMap, domain, samples: int, count: int) -> List[Polyline]:
    """Images of ``count`` equally spaced rays from the centre to the boundary."""
    out = []
    r_start = max(m.inner_radius, 0.0)
    for k in range(count):
        theta = 2.0 * math.pi * k / count
        r = np.linspace(r_start, _boundary_radius(domain, theta), samples)
        out.append(_trace(m, r, np.full(samples, theta), False))
    return out


def polygon_area(x, y) -> float:
    """Signed shoelace area of a closed polygon (positive when counter-clockwise)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 0.5 * math.fsum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def _path(line: Polyline) -> str:
    pts = [f"{SVG_SCALE * u:.6f} {-SVG_SCALE * v:.6f}" for u, v in zip(line.image_x, line.image_y)]
    return "M " + " L ".join(pts) + (" Z" if line.closed else "")


def to_svg(lines: List[Polyline]) -> str:
    extent = max(1.0, max(float(np.max(np.abs(np.concatenate([l.image_x, l.image_y])))) for l in lines))
    half = math.ceil(SVG_SCALE * extent * 1.05)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{-half} {-half} {2 * half} {2 * half}">']
    for i, line in enumerate(lines):
        stroke = "black" if i == 0 else "gray"
        out.append(f'  <path d="{_path(line)}" fill="none" stroke="{stroke}" stroke-width="0.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def to_csv(line: Polyline) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "theta", "x", "y", "image_x", "image_y"])
    for row in zip(line.r, line.theta, line.x, line.y, line.image_x, line.image_y):
        w.writerow([f"{v:.9g}" for v in row])
    return buf.getvalue()


def export_shape(m: AnyMap, domain, samples: int = 256, fmt: str = "svg", n_slices: int = 0) -> str:
    """Document with the mapped boundary (and, in SVG, ``n_slices`` mapped rays).

    CSV carries the boundary polyline only, one row per sample.
    """
    fmt = fmt.lower()
    line = boundary(m, domain, samples)
    if fmt == "csv":
        return to_csv(line)
    if fmt == "svg":
        return to_svg([line] + slices(m, domain, samples, n_slices))
    raise ParameterOutOfRange(f"format must be svg or csv, got {fmt!r}")
