"""Axis-aligned sample lattices with optional disc/annulus masks.

Nodes are classified as inactive (outside the mask), boundary (active
and either on the array edge or adjacent to an inactive node within the
full 3^m - 1 neighborhood), or interior.  Solvers impose Dirichlet data
on boundary nodes and unknowns live on interior nodes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    lo: tuple
    hi: tuple
    shape: tuple          # node count per axis, endpoints included
    mask: tuple | None = None  # None | ('disc', r) | ('annulus', r0, r1)

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or len(self.lo) != len(self.shape):
            raise LatticeError("lo, hi and shape must have the same length")
        if any(n < 2 for n in self.shape):
            raise LatticeError("need at least two nodes per axis")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise LatticeError("hi must exceed lo on every axis")

    @property
    def m(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple:
        return tuple((h - l) / (n - 1) for l, h, n in zip(self.lo, self.hi, self.shape))

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(l, h, n) for l, h, n in zip(self.lo, self.hi, self.shape)]

    # -- constructors --------------------------------------------------------

    @classmethod
    def box(cls, lo, hi, nodes) -> "Lattice":
        lo, hi = tuple(map(float, lo)), tuple(map(float, hi))
        if isinstance(nodes, int):
            nodes = (nodes,) * len(lo)
        return cls(lo, hi, tuple(int(n) for n in nodes))

    @classmethod
    def disc(cls, radius: float, nodes: int) -> "Lattice":
        r = float(radius)
        return cls((-r, -r), (r, r), (int(nodes),) * 2, mask=("disc", r))

    @classmethod
    def annulus(cls, r_min: float, r_max: float, nodes: int) -> "Lattice":
        if not 0 < r_min < r_max:
            raise LatticeError("need 0 < r_min < r_max")
        r = float(r_max)
        return cls((-r, -r), (r, r), (int(nodes),) * 2, mask=("annulus", float(r_min), r))

    @classmethod
    def from_spacing(cls, lo, hi, spacing, mask=None) -> "Lattice":
        lo, hi = tuple(map(float, lo)), tuple(map(float, hi))
        if np.isscalar(spacing):
            spacing = (float(spacing),) * len(lo)
        shape = tuple(int(round((h - l) / s)) + 1 for l, h, s in zip(lo, hi, spacing))
        return cls(lo, hi, shape, mask=mask)


@lru_cache(maxsize=64)
def node_points(lat: Lattice) -> np.ndarray:
    """All node coordinates, shape (prod(shape), m), C-order."""
    grids = np.meshgrid(*lat.axes(), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


@lru_cache(maxsize=64)
def active_mask(lat: Lattice) -> np.ndarray:
    pts = node_points(lat)
    if lat.mask is None:
        act = np.ones(pts.shape[0], dtype=bool)
    else:
        r = np.linalg.norm(pts, axis=1)
        eps = 1e-9 * max(lat.spacing)
        if lat.mask[0] == "disc":
            act = r <= lat.mask[1] + eps
        elif lat.mask[0] == "annulus":
            act = (r >= lat.mask[1] - eps) & (r <= lat.mask[2] + eps)
        else:
            raise LatticeError(f"unknown mask kind {lat.mask[0]!r}")
    return act.reshape(lat.shape)


@lru_cache(maxsize=64)
def boundary_mask(lat: Lattice) -> np.ndarray:
    act = active_mask(lat)
    bnd = np.zeros_like(act)
    for d in range(lat.m):
        sl_lo = [slice(None)] * lat.m
        sl_lo[d] = 0
        sl_hi = [slice(None)] * lat.m
        sl_hi[d] = act.shape[d] - 1
        bnd[tuple(sl_lo)] = True
        bnd[tuple(sl_hi)] = True
    # adjacency to an inactive node anywhere in the 3^m - 1 neighborhood
    for off in itertools.product((-1, 0, 1), repeat=lat.m):
        if all(o == 0 for o in off):
            continue
        shifted = np.ones_like(act)
        src = [slice(None)] * lat.m
        dst = [slice(None)] * lat.m
        for d, o in enumerate(off):
            if o == 1:
                src[d] = slice(1, None)
                dst[d] = slice(0, -1)
            elif o == -1:
                src[d] = slice(0, -1)
                dst[d] = slice(1, None)
        shifted[tuple(dst)] = act[tuple(src)]
        bnd |= ~shifted
    return bnd & act


@lru_cache(maxsize=64)
def interior_mask(lat: Lattice) -> np.ndarray:
    return active_mask(lat) & ~boundary_mask(lat)


def strides(lat: Lattice) -> np.ndarray:
    st = np.ones(lat.m, dtype=int)
    for d in range(lat.m - 2, -1, -1):
        st[d] = st[d + 1] * lat.shape[d + 1]
    return st


def flat_offset(lat: Lattice, off) -> int:
    return int(np.dot(strides(lat), np.asarray(off, dtype=int)))
