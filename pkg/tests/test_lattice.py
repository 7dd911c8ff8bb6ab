import numpy as np
import pytest

from spinweb import LatticeSpec
from spinweb.errors import ParameterError


def test_counts():
    spec = LatticeSpec(5)
    assert spec.n_sites == 25
    assert spec.n_bonds == 50


@pytest.mark.parametrize("bad", [1, 0, -3])
def test_rejects_degenerate_sizes(bad):
    with pytest.raises(ParameterError):
        LatticeSpec(bad)


def test_rejects_non_integer_and_open_boundaries():
    with pytest.raises(ParameterError):
        LatticeSpec(4.0)
    with pytest.raises(ParameterError):
        LatticeSpec(4, periodic=False)


def test_site_index_wraps():
    spec = LatticeSpec(4)
    assert spec.site_index(0, 0) == 0
    assert spec.site_index(3, 2) == 11
    assert spec.site_index(4, 0) == 0
    assert spec.site_index(-1, -1) == spec.site_index(3, 3)


def test_site_coords_roundtrip():
    spec = LatticeSpec(7)
    i = np.arange(spec.n_sites)
    x, y = spec.site_coords(i)
    assert np.array_equal(x + 7 * y, i)


def test_bond_ownership_convention():
    # bond 2i leaves site i towards +x, bond 2i+1 towards +y
    spec = LatticeSpec(3)
    assert spec.bond_endpoints(0) == (0, 1)
    assert spec.bond_endpoints(1) == (0, 3)
    assert spec.bond_endpoints(4) == (2, 0)  # site (2,0) wraps right to (0,0)
    assert spec.bond_endpoints(2 * 6 + 1) == (6, 0)  # site (0,2) wraps up to (0,0)


def test_endpoint_arrays_match_scalar_endpoints():
    spec = LatticeSpec(5)
    u, v = spec.bond_endpoint_arrays()
    for b in range(spec.n_bonds):
        assert (u[b], v[b]) == spec.bond_endpoints(b)


def test_every_site_has_four_incident_bonds():
    spec = LatticeSpec(6)
    u, v = spec.bond_endpoint_arrays()
    incident = np.bincount(u, minlength=spec.n_sites) + np.bincount(v, minlength=spec.n_sites)
    assert (incident == 4).all()
