import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from levy_spde.errors import ConfigError
from levy_spde.measure import LevyMeasure, compile_density, moment, sample_jump, symmetric_pm1
from levy_spde.streams import block_generator

atom = st.tuples(
    st.floats(0.05, 5.0).flatmap(lambda z: st.sampled_from([z, -z])),
    st.floats(0.01, 3.0),
)


def test_symmetric_pm1_moments_are_one():
    nu = symmetric_pm1()
    assert nu.total_mass == 1.0
    assert nu.mean == 0.0
    for p in (1.0, 2.0, 3.5, 4.0):
        assert moment(nu, p) == 1.0


@given(st.lists(atom, min_size=1, max_size=6), st.floats(0.5, 6.0))
def test_atom_moment_matches_sum(atoms, p):
    nu = LevyMeasure.from_atoms(atoms)
    expect = sum(w * abs(z) ** p for z, w in atoms)
    assert nu.moment(p) == pytest.approx(expect, rel=1e-12)


@given(st.lists(atom, min_size=1, max_size=4), st.floats(0.1, 10.0))
def test_scaling_scales_every_moment(atoms, c):
    nu = LevyMeasure.from_atoms(atoms)
    assert nu.scaled(c).moment(2.0) == pytest.approx(c * nu.moment(2.0), rel=1e-12)
    assert nu.scaled(c).total_mass == pytest.approx(c * nu.total_mass, rel=1e-12)


def test_density_moments_against_incomplete_gamma():
    eps, M = 0.01, 10.0
    nu = LevyMeasure.from_density("exp(-abs(z))", [eps, M])

    def closed(k):
        # 2 * int_eps^M z^k e^{-z} dz
        return 2.0 * math.gamma(k + 1) * (special.gammainc(k + 1, M) - special.gammainc(k + 1, eps))

    assert nu.total_mass == pytest.approx(2.0 * (math.exp(-eps) - math.exp(-M)), rel=1e-10)
    assert nu.moment(2.0) == pytest.approx(closed(2), rel=1e-10)
    assert nu.moment(4.0) == pytest.approx(closed(4), rel=1e-10)
    assert abs(nu.mean) < 1e-12


def test_density_sampling_reproduces_normalised_moments():
    nu = LevyMeasure.from_density("exp(-abs(z))", [0.01, 10.0])
    z = nu.sample(block_generator(3, "test", 0), 200000)
    assert np.all((np.abs(z) >= 0.01) & (np.abs(z) <= 10.0))
    target = nu.moment(2.0) / nu.total_mass
    se = np.std(z**2) / math.sqrt(z.size)
    assert abs(np.mean(z**2) - target) < 4 * se


def test_atom_sampling_frequencies():
    nu = LevyMeasure.from_atoms([(-1.0, 0.3), (2.0, 0.7)])
    z = nu.sample(block_generator(1, "test", 0), 100000)
    frac = np.mean(z == 2.0)
    assert set(np.unique(z)) == {-1.0, 2.0}
    assert abs(frac - 0.7) < 4 * math.sqrt(0.21 / z.size)
    assert sample_jump(nu, block_generator(1, "test", 1)) in (-1.0, 2.0)


@pytest.mark.parametrize("atoms", [[], [(0.0, 1.0)], [(1.0, -0.5)], [(math.inf, 1.0)]])
def test_invalid_atoms_rejected(atoms):
    with pytest.raises(ConfigError):
        LevyMeasure.from_atoms(atoms)


@pytest.mark.parametrize("support", [(0.0, 1.0), (2.0, 1.0), (0.1, math.inf)])
def test_invalid_support_rejected(support):
    with pytest.raises(ConfigError):
        LevyMeasure.from_density("exp(-abs(z))", support)


def test_density_expression_is_sandboxed():
    with pytest.raises(ConfigError):
        compile_density("__import__('os').getcwd()")
