"""Channel noise models for robustness experiments.

Conventions follow the common numerical-toolkit definitions on
normalized intensities: gaussian and speckle operate on samples scaled
to [0, 1] and clamp before rescaling, poisson draws use the raw 8-bit
value as the rate, and salt & pepper replaces samples with 0 or 255.
All three planes are attacked. Seeding is per frame, so clips can be
processed in any order or in parallel with identical output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import FormatError
from .videoio import FrameYuv420

KINDS = ("salt_pepper", "gaussian", "poisson", "speckle")


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    density: float = 0.0  # salt_pepper
    mean: float = 0.0  # gaussian
    variance: float = 0.0  # gaussian, speckle

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FormatError(f"unknown attack kind {self.kind!r}")
        if self.kind == "salt_pepper" and not 0.0 <= self.density <= 1.0:
            raise FormatError(f"salt & pepper density {self.density} outside [0, 1]")
        if self.variance < 0.0:
            raise FormatError(f"negative variance {self.variance}")

    def label(self) -> str:
        if self.kind == "salt_pepper":
            return f"sp:{self.density:g}"
        if self.kind == "gaussian":
            return f"gauss:{self.mean:g}:{self.variance:g}"
        if self.kind == "speckle":
            return f"speckle:{self.variance:g}"
        return "poisson"

    @classmethod
    def parse(cls, text: str) -> "AttackSpec":
        """Parse CLI spec strings: sp:D, gauss:M:V, poisson, speckle:V."""
        parts = text.strip().split(":")
        name = parts[0].lower()
        try:
            if name in ("sp", "salt_pepper", "saltpepper") and len(parts) == 2:
                return cls(kind="salt_pepper", density=float(parts[1]))
            if name in ("gauss", "gaussian") and len(parts) == 3:
                return cls(kind="gaussian", mean=float(parts[1]), variance=float(parts[2]))
            if name == "poisson" and len(parts) == 1:
                return cls(kind="poisson")
            if name == "speckle" and len(parts) == 2:
                return cls(kind="speckle", variance=float(parts[1]))
        except ValueError as exc:
            raise FormatError(f"bad attack parameter in {text!r}: {exc}") from exc
        raise FormatError(f"cannot parse attack spec {text!r}")


def _per_plane(frame: FrameYuv420, fn) -> FrameYuv420:
    return FrameYuv420(y=fn(frame.y), u=fn(frame.u), v=fn(frame.v))


def salt_pepper(frame: FrameYuv420, density: float, rng: np.random.Generator) -> FrameYuv420:
    def corrupt(plane):
        hit = rng.random(plane.shape) < density
        values = rng.integers(0, 2, plane.shape, dtype=np.uint8) * np.uint8(255)
        return np.where(hit, values, plane)

    if not 0.0 <= density <= 1.0:
        raise FormatError(f"density {density} outside [0, 1]")
    return _per_plane(frame, corrupt)


def gaussian(frame: FrameYuv420, mean: float, variance: float, rng: np.random.Generator) -> FrameYuv420:
    sigma = float(np.sqrt(variance))

    def corrupt(plane):
        noisy = plane.astype(np.float64) / 255.0 + rng.normal(mean, sigma, plane.shape)
        return np.round(np.clip(noisy, 0.0, 1.0) * 255.0).astype(np.uint8)

    return _per_plane(frame, corrupt)


def poisson(frame: FrameYuv420, rng: np.random.Generator) -> FrameYuv420:
    def corrupt(plane):
        return np.clip(rng.poisson(plane.astype(np.float64)), 0, 255).astype(np.uint8)

    return _per_plane(frame, corrupt)


def speckle(frame: FrameYuv420, variance: float, rng: np.random.Generator) -> FrameYuv420:
    # multiplicative zero-mean uniform noise with the requested variance
    limit = float(np.sqrt(3.0 * variance))

    def corrupt(plane):
        factor = 1.0 + rng.uniform(-limit, limit, plane.shape)
        noisy = plane.astype(np.float64) / 255.0 * factor
        return np.round(np.clip(noisy, 0.0, 1.0) * 255.0).astype(np.uint8)

    return _per_plane(frame, corrupt)


def apply_attack(frame: FrameYuv420, spec: AttackSpec, rng: np.random.Generator) -> FrameYuv420:
    if spec.kind == "salt_pepper":
        return salt_pepper(frame, spec.density, rng)
    if spec.kind == "gaussian":
        return gaussian(frame, spec.mean, spec.variance, rng)
    if spec.kind == "poisson":
        return poisson(frame, rng)
    return speckle(frame, spec.variance, rng)


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, frame_index])


def attack_video(
    frames: Iterable[FrameYuv420], specs: list[AttackSpec], seed: int
) -> Iterator[FrameYuv420]:
    """Apply the attack list in order to every frame; an empty list passes through."""
    for index, frame in enumerate(frames):
        rng = frame_rng(seed, index)
        for spec in specs:
            frame = apply_attack(frame, spec, rng)
        yield frame
