"""Render configuration."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class PathConfig:
    spp: int = 16
    max_depth: int = 256
    rr_start: int = 8
    separate_specular: bool = False
    roughness: float = 0.0
    jitter: bool = True

    def __post_init__(self):
        if self.spp < 1:
            raise ValueError("spp must be >= 1")
        if self.max_depth < 2:
            raise ValueError("max_depth must be >= 2")
        if self.rr_start < 1:
            raise ValueError("rr_start must be >= 1")

    @classmethod
    def from_render_section(cls, render: dict, **overrides) -> "PathConfig":
        kwargs = {
            "spp": int(render.get("spp", 16)),
            "max_depth": int(render.get("max_depth", 256)),
            "rr_start": int(render.get("rr_start", 8)),
            "separate_specular": bool(render.get("separate_specular", False)),
            "roughness": float(render.get("roughness", 0.0)),
        }
        kwargs.update(overrides)
        return cls(**kwargs)
