from dataclasses import dataclass, field
from enum import Enum
from typing import Dict

import numpy as np

MIN_CELLS = 3


class MeshError(Exception):
    pass


class Region(str, Enum):
    ANODE = "anode"
    SEPARATOR = "separator"
    CATHODE = "cathode"


ELECTRODES = (Region.ANODE, Region.CATHODE)


@dataclass(frozen=True)
class CellGeometry:
    L: float
    L1: float
    delta: float
    Rs_neg: float
    Rs_pos: float
    A: float
    Rf: float = 0.0

    @property
    def cathode_start(self) -> float:
        return self.L1 + self.delta

    @property
    def cathode_length(self) -> float:
        return self.L - self.L1 - self.delta

    def radius(self, region: Region) -> float:
        return self.Rs_neg if region == Region.ANODE else self.Rs_pos


@dataclass(frozen=True)
class MeshSpec:
    cells_neg: int = 15
    cells_sep: int = 15
    cells_pos: int = 15
    shells_neg: int = 25
    shells_pos: int = 25
    grading: float = 1.0


@dataclass(frozen=True, eq=False)
class ParticleGrid:
    """Radial finite volumes on [0, Rs]; volumes carry the r^2 metric without 4*pi."""

    faces: np.ndarray
    centers: np.ndarray
    volumes: np.ndarray

    @property
    def radius(self) -> float:
        return float(self.faces[-1])

    @property
    def size(self) -> int:
        return len(self.centers)


@dataclass(frozen=True, eq=False)
class Mesh:
    faces: np.ndarray
    centers: np.ndarray
    widths: np.ndarray
    regions: np.ndarray
    local_fraction: np.ndarray
    n_neg: int
    n_sep: int
    n_pos: int
    particles: Dict[Region, ParticleGrid] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.centers)

    @property
    def length(self) -> float:
        return float(self.faces[-1] - self.faces[0])

    def cells(self, region: Region) -> slice:
        if region == Region.ANODE:
            return slice(0, self.n_neg)
        if region == Region.SEPARATOR:
            return slice(self.n_neg, self.n_neg + self.n_sep)
        return slice(self.n_neg + self.n_sep, self.size)

    @property
    def electrode_cells(self) -> np.ndarray:
        """Macro-cell indices carrying particles, anode first."""
        return np.r_[0 : self.n_neg, self.n_neg + self.n_sep : self.size]

    @property
    def n_electrode(self) -> int:
        return self.n_neg + self.n_pos

    def electrode_slice(self, region: Region) -> slice:
        """Rows of electrode-only arrays (phis, csB, cs) belonging to one region."""
        if region == Region.ANODE:
            return slice(0, self.n_neg)
        if region == Region.CATHODE:
            return slice(self.n_neg, self.n_electrode)
        raise MeshError("The separator carries no electrode unknowns")

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.widths, values))


def _region_faces(start: float, end: float, cells: int, grading: float) -> np.ndarray:
    if grading == 1.0:
        faces = np.linspace(start, end, cells + 1)
    else:
        # mirrored geometric widths, finest at both region faces
        half = np.minimum(np.arange(cells), np.arange(cells)[::-1])
        widths = grading ** half.astype(float)
        faces = start + (end - start) * np.concatenate(
            ([0.0], np.cumsum(widths) / widths.sum())
        )
    faces[0] = start
    faces[-1] = end
    return faces


def build_particle_grid(radius: float, shells: int) -> ParticleGrid:
    if shells < MIN_CELLS:
        raise MeshError(f"Particle needs at least {MIN_CELLS} shells, got {shells}")
    faces = np.linspace(0.0, radius, shells + 1)
    faces[-1] = radius
    centers = 0.5 * (faces[1:] + faces[:-1])
    volumes = (faces[1:] ** 3 - faces[:-1] ** 3) / 3.0
    return ParticleGrid(faces=faces, centers=centers, volumes=volumes)


def build_mesh(geometry: CellGeometry, resolution: MeshSpec) -> Mesh:
    counts = {
        Region.ANODE: resolution.cells_neg,
        Region.SEPARATOR: resolution.cells_sep,
        Region.CATHODE: resolution.cells_pos,
    }
    for region, count in counts.items():
        if count < MIN_CELLS:
            raise MeshError(
                f"Region '{region.value}' needs at least {MIN_CELLS} cells, got {count}"
            )
    if not (0 < geometry.L1 and 0 < geometry.delta):
        raise MeshError("Anode and separator lengths must be positive")
    if not geometry.cathode_start < geometry.L:
        raise MeshError(
            f"Cathode is empty: L1 + delta = {geometry.cathode_start} >= L = {geometry.L}"
        )
    if resolution.grading <= 0:
        raise MeshError(f"Grading must be positive, got {resolution.grading}")

    bounds = [0.0, geometry.L1, geometry.cathode_start, geometry.L]
    pieces = []
    regions = []
    fractions = []
    for k, region in enumerate((Region.ANODE, Region.SEPARATOR, Region.CATHODE)):
        region_faces = _region_faces(
            bounds[k], bounds[k + 1], counts[region], resolution.grading
        )
        pieces.append(region_faces if k == 0 else region_faces[1:])
        regions += [region.value] * counts[region]
        centers = 0.5 * (region_faces[1:] + region_faces[:-1])
        fractions.append((centers - bounds[k]) / (bounds[k + 1] - bounds[k]))

    faces = np.concatenate(pieces)
    particles = {
        Region.ANODE: build_particle_grid(geometry.Rs_neg, resolution.shells_neg),
        Region.CATHODE: build_particle_grid(geometry.Rs_pos, resolution.shells_pos),
    }
    return Mesh(
        faces=faces,
        centers=0.5 * (faces[1:] + faces[:-1]),
        widths=np.diff(faces),
        regions=np.array(regions),
        local_fraction=np.concatenate(fractions),
        n_neg=counts[Region.ANODE],
        n_sep=counts[Region.SEPARATOR],
        n_pos=counts[Region.CATHODE],
        particles=particles,
    )
