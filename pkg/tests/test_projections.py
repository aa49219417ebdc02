import numpy as np
import pytest

from mirrorflow.errors import ParameterError
from mirrorflow.numerics import SeededRng
from mirrorflow.projections import AffineSet, Box, HalfSpace, PositiveOrthant, Simplex, Sphere


def sample_projectors():
    return [
        Box(lo=np.zeros(3), hi=np.ones(3)),
        Sphere(center=np.array([1.0, -1.0, 0.5]), radius=2.0),
        AffineSet(a=np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]), b=np.array([2.0, 1.0])),
        HalfSpace(a=np.array([1.0, 2.0, -1.0]), b=0.5),
        Simplex(3),
        PositiveOrthant(3),
    ]


def test_box_clamp():
    p = Box(lo=np.zeros(3), hi=np.ones(3))
    assert np.allclose(p.project(np.array([-1.0, 0.5, 3.0])), [0.0, 0.5, 1.0])


def test_sphere_radial_scaling():
    p = Sphere(center=np.zeros(2), radius=2.0)
    assert np.allclose(p.project(np.array([4.0, 0.0])), [2.0, 0.0])
    inside = np.array([0.3, -0.4])
    assert np.allclose(p.project(inside), inside)


def test_affine_symmetric_point():
    p = AffineSet(a=np.array([[1.0, 1.0]]), b=np.array([2.0]))
    assert np.allclose(p.project(np.zeros(2)), [1.0, 1.0])


def test_halfspace_formula():
    p = HalfSpace(a=np.array([1.0, 0.0]), b=0.0)
    assert np.allclose(p.project(np.array([2.0, 3.0])), [0.0, 3.0])
    assert np.allclose(p.project(np.array([-1.0, 3.0])), [-1.0, 3.0])


def test_simplex_symmetry():
    p = Simplex(3)
    assert np.allclose(p.project(np.full(3, 0.2)), np.full(3, 1 / 3))


def test_simplex_matches_exhaustive_small_case():
    # oracle: dense grid search over the simplex for the nearest point
    p = Simplex(2)
    u = np.array([0.9, -0.3])
    grid = np.linspace(0.0, 1.0, 20001)
    cand = np.stack([grid, 1.0 - grid], axis=1)
    best = cand[np.argmin(np.sum((cand - u) ** 2, axis=1))]
    assert np.allclose(p.project(u), best, atol=1e-4)


def test_construction_validation():
    with pytest.raises(ParameterError):
        Box(lo=np.ones(2), hi=np.zeros(2))
    with pytest.raises(ParameterError):
        Sphere(center=np.zeros(2), radius=0.0)
    with pytest.raises(ParameterError):
        HalfSpace(a=np.zeros(2), b=1.0)


@pytest.mark.parametrize("proj_index", range(6))
def test_membership_idempotence_variational_nonexpansive(proj_index):
    p = sample_projectors()[proj_index]
    rng = SeededRng(100 + proj_index)
    for _ in range(200):
        u = 4.0 * rng.normal(p.dim)
        w = 4.0 * rng.normal(p.dim)
        pu, pw = p.project(u), p.project(w)
        assert p.violation(pu) <= 1e-12
        # idempotence
        assert np.max(np.abs(p.project(pu) - pu)) <= 1e-12
        # variational inequality (P(u) - z).(P(u) - u) <= 0 for z in the set
        z = p.project(2.0 * rng.normal(p.dim))
        assert (pu - z) @ (pu - u) <= 1e-12
        # nonexpansiveness
        assert np.linalg.norm(pu - pw) <= np.linalg.norm(u - w) + 1e-12


def test_affine_output_satisfies_system():
    p = AffineSet(a=np.array([[1.0, 2.0, 3.0]]), b=np.array([1.0]))
    rng = SeededRng(3)
    for _ in range(50):
        u = 5.0 * rng.normal(3)
        assert np.max(np.abs(p.a @ p.project(u) - p.b)) <= 1e-10
