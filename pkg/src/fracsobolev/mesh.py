"""Intervals, 1-D meshes and node-aligned subdomain partitions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidCount, InvalidGrading, UnalignedBreakpoint

__all__ = [
    "Interval",
    "Mesh1D",
    "Partition",
    "uniform_mesh",
    "graded_mesh",
    "align_partition",
    "partition_from_json",
]


@dataclass(frozen=True)
class Interval:
    left: float
    right: float

    def __post_init__(self):
        if not self.left < self.right:
            raise ValueError(f"interval needs left < right, got ({self.left}, {self.right})")

    @property
    def diameter(self) -> float:
        return self.right - self.left

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.left + self.right)

    def contains(self, x, closed: bool = False):
        if closed:
            return (x >= self.left) & (x <= self.right)
        return (x > self.left) & (x < self.right)

    def dist_to_boundary(self, x):
        x = np.asarray(x, dtype=float)
        return np.minimum(x - self.left, self.right - x)

    def scaled(self, tau: float, anchor: float | None = None) -> "Interval":
        """Image under ``x -> anchor + tau (x - anchor)``; anchor defaults to ``left``."""
        anchor = self.left if anchor is None else anchor
        return Interval(anchor + tau * (self.left - anchor), anchor + tau * (self.right - anchor))

    def as_tuple(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Strictly increasing nodes covering ``domain`` exactly.

    Hashing is by identity so meshes can key the spectral-basis cache.
    """

    domain: Interval
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidCount("a mesh needs at least two nodes")
        if nodes[0] != self.domain.left or nodes[-1] != self.domain.right:
            raise ValueError("first/last node must coincide with the domain end points")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def n_elems(self) -> int:
        return self.nodes.size - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    def submesh(self, i0: int, i1: int) -> "Mesh1D":
        """Mesh made of nodes ``i0..i1`` inclusive."""
        sub = self.nodes[i0 : i1 + 1]
        return Mesh1D(Interval(float(sub[0]), float(sub[-1])), sub)

    def scaled(self, tau: float, anchor: float | None = None) -> "Mesh1D":
        anchor = self.domain.left if anchor is None else anchor
        nodes = anchor + tau * (self.nodes - anchor)
        return Mesh1D(Interval(float(nodes[0]), float(nodes[-1])), nodes)

    def to_dict(self) -> dict:
        return {"domain": list(self.domain.as_tuple()), "nodes": self.nodes.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Mesh1D":
        return cls(Interval(*data["domain"]), np.asarray(data["nodes"], dtype=float))


def uniform_mesh(domain: Interval, n_elems: int) -> Mesh1D:
    if n_elems < 1:
        raise InvalidCount(f"n_elems must be >= 1, got {n_elems}")
    nodes = domain.left + domain.diameter * np.arange(n_elems + 1) / n_elems
    nodes[-1] = domain.right
    return Mesh1D(domain, nodes)


def graded_mesh(domain: Interval, n_elems: int, grading: float, toward: str = "left") -> Mesh1D:
    """Nodes ``left + tau (k/n)^grading`` (mirrored when ``toward='right'``)."""
    if n_elems < 1:
        raise InvalidCount(f"n_elems must be >= 1, got {n_elems}")
    if grading < 1:
        raise InvalidGrading(f"grading must be >= 1, got {grading}")
    if toward not in ("left", "right"):
        raise ValueError("toward must be 'left' or 'right'")
    frac = (np.arange(n_elems + 1) / n_elems) ** grading
    if toward == "left":
        nodes = domain.left + domain.diameter * frac
    else:
        nodes = domain.right - domain.diameter * frac[::-1]
    nodes[0], nodes[-1] = domain.left, domain.right
    return Mesh1D(domain, nodes)


@dataclass(frozen=True, eq=False)
class Partition:
    """Non-overlapping subdomains whose end points are mesh nodes."""

    mesh: Mesh1D
    breakpoints: tuple
    break_index: tuple = field(repr=False)

    @property
    def n_sub(self) -> int:
        return len(self.breakpoints) + 1

    @property
    def node_ranges(self) -> list[tuple[int, int]]:
        """Inclusive node index range ``(i0, i1)`` of every subdomain."""
        idx = [0, *self.break_index, self.mesh.n_nodes - 1]
        return list(zip(idx[:-1], idx[1:]))

    @property
    def subdomain_of_element(self) -> np.ndarray:
        labels = np.empty(self.mesh.n_elems, dtype=int)
        for j, (i0, i1) in enumerate(self.node_ranges):
            labels[i0:i1] = j
        return labels

    def interval(self, j: int) -> Interval:
        i0, i1 = self.node_ranges[j]
        return Interval(float(self.mesh.nodes[i0]), float(self.mesh.nodes[i1]))

    def submesh(self, j: int) -> Mesh1D:
        return self.mesh.submesh(*self.node_ranges[j])

    def interior_nodes(self, j: int) -> np.ndarray:
        """Global indices of nodes strictly inside subdomain ``j``."""
        i0, i1 = self.node_ranges[j]
        return np.arange(i0 + 1, i1)

    @property
    def interface_nodes(self) -> np.ndarray:
        return np.asarray(self.break_index, dtype=int)

    def to_dict(self) -> dict:
        data = self.mesh.to_dict()
        data["breakpoints"] = list(self.breakpoints)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def align_partition(mesh: Mesh1D, breakpoints: Sequence[float]) -> Partition:
    """Snap each breakpoint to a mesh node (within ``1e-12 h``) or fail."""
    nodes = mesh.nodes
    h = mesh.h
    idx = []
    for bp in sorted(float(b) for b in breakpoints):
        if not mesh.domain.contains(bp):
            raise UnalignedBreakpoint(f"breakpoint {bp} is not inside {mesh.domain.as_tuple()}")
        k = int(np.argmin(np.abs(nodes - bp)))
        local_h = min(h[max(k - 1, 0)], h[min(k, h.size - 1)])
        if abs(nodes[k] - bp) > 1e-12 * local_h or k in (0, nodes.size - 1):
            raise UnalignedBreakpoint(f"breakpoint {bp} is not a mesh node")
        if k not in idx:
            idx.append(k)
    return Partition(mesh, tuple(float(nodes[k]) for k in idx), tuple(idx))


def partition_from_json(text: str) -> Partition:
    data = json.loads(text)
    return align_partition(Mesh1D.from_dict(data), data.get("breakpoints", []))
