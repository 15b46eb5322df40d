"""Shared fixtures: the expensive mesh ladders are solved once per session."""

import time
from dataclasses import dataclass, field

import pytest

from sloshiso import geometry, fem


@dataclass
class Ladder:
    """Eigenvalues of one shape across consecutive refinement levels."""

    shape: geometry.Shape
    spectra: dict = field(default_factory=dict)   # level -> Spectrum
    mus: list = field(default_factory=list)       # (level, mu1) pairs
    extrapolation: fem.ExtrapolationResult = None
    seconds: float = 0.0


def solve_ladder(spec: geometry.ShapeSpec, levels, k: int = 2) -> Ladder:
    shape = geometry.build_shape(spec)
    ladder = Ladder(shape=shape)
    t0 = time.perf_counter()
    mesh = geometry.triangulate(shape, levels[0])
    for level in levels:
        while mesh.refinement_level < level:
            mesh = geometry.refine(mesh)
        stiffness, mass = fem.assemble(mesh)
        spectrum = fem.neumann_eigs(stiffness, mass, k)
        ladder.spectra[level] = spectrum
        ladder.mus.append((level, float(spectrum.values[0])))
    ladder.extrapolation = fem.extrapolate(ladder.mus[-3:])
    ladder.seconds = time.perf_counter() - t0
    return ladder


@pytest.fixture(scope="session")
def square_ladder():
    spec = geometry.ShapeSpec("rectangle", {"width": 1.0, "height": 1.0})
    return solve_ladder(spec, (3, 4, 5, 6))


@pytest.fixture(scope="session")
def triangle_ladder():
    spec = geometry.ShapeSpec("regular_polygon", {"n": 3, "side": 1.0})
    return solve_ladder(spec, (4, 5, 6))


@pytest.fixture(scope="session")
def disk_ladder():
    spec = geometry.ShapeSpec("ellipse", {"a": 1.0, "b": 1.0}, boundary_points=256)
    return solve_ladder(spec, (2, 3, 4))
