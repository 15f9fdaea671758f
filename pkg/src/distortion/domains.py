"""Planar reference domains shared by quadrature, shape export and CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Disk:
    radius: float = 1.0

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


@dataclass(frozen=True)
class Annulus:
    """``inner < |x| < outer``; a tiny ``inner`` stands in for a punctured disk."""

    inner: float
    outer: float = 1.0

    @property
    def area(self) -> float:
        return math.pi * (self.outer**2 - self.inner**2)


@dataclass(frozen=True)
class Square:
    half_width: float = 1.0

    @property
    def area(self) -> float:
        return 4.0 * self.half_width**2


Domain = Union[Disk, Annulus, Square]


def parse_domain(text: str) -> Domain:
    """``disk``, ``disk:R``, ``annulus:r0`` or ``square:a``."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if name == "disk":
        return Disk(float(arg) if arg else 1.0)
    if name == "annulus":
        return Annulus(float(arg) if arg else 1e-6)
    if name == "square":
        return Square(float(arg) if arg else 1.0)
    raise ValueError(f"unknown domain {text!r}")
