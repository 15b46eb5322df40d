import math

import numpy as np
import pytest
from scipy import linalg, sparse

from sloshiso import troesch as tr

J1P1_SQ = 1.84118378134065930264362951364 ** 2


def dense_radial_pair(basin, m, n):
    """Rebuild the 1D matrices independently for the oracle comparisons."""
    grid = np.linspace(0.0, basin.r0, n)
    dr = grid[1] - grid[0]
    left = grid[:-1]
    off = 0.5 * dr / math.sqrt(3.0)
    gauss = np.stack([left + 0.5 * dr - off, left + 0.5 * dr + off], axis=1)
    w = 0.5 * dr
    hg = basin.h(gauss)
    xi = (gauss - left[:, None]) / dr
    phi = np.stack([1.0 - xi, xi], axis=2)
    dphi = np.array([-1.0, 1.0]) / dr
    kg = np.einsum("eg,i,j->eij", w * hg * gauss, dphi, dphi)
    kr = m * m * np.einsum("eg,egi,egj->eij", w * hg / gauss, phi, phi)
    ml = np.einsum("eg,egi,egj->eij", w * gauss, phi, phi)
    idx = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1)
    rows = np.repeat(idx, 2, axis=1).ravel()
    cols = np.tile(idx, (1, 2)).ravel()
    K = sparse.coo_matrix(((kg + kr).ravel(), (rows, cols)), shape=(n, n)).toarray()
    M = sparse.coo_matrix((ml.ravel(), (rows, cols)), shape=(n, n)).toarray()
    return K, M


class TestBasins:
    def test_parabolic_basin_profile(self):
        basin = tr.parabolic_basin(1.0, 1.0)
        assert basin.h(0.0) == pytest.approx(0.5)
        assert basin.h(1.0) == pytest.approx(0.0, abs=1e-15)
        # flat at the axis: h(eps) - h(0) = O(eps^2)
        eps = 1e-7
        assert abs(basin.h(eps) - basin.h(0.0)) <= eps * eps
        assert basin.in_regime

    def test_parabolic_volume_closed_form(self):
        # integral of h r dr = nu r0^4 / 8, so the bound returns nu
        for nu, r0 in [(1.0, 1.0), (2.5, 3.0)]:
            basin = tr.parabolic_basin(nu, r0)
            assert tr.troesch_bound(basin) == pytest.approx(nu, rel=1e-12)

    def test_profile_values(self):
        r = np.linspace(0.0, 1.0, 5)
        assert np.allclose(tr.RadialBasin.flat(2.0, 1.0).h(r), 2.0)
        assert np.allclose(tr.RadialBasin.conical(2.0, 1.0).h(r), 2.0 * (1 - r))
        assert np.allclose(tr.RadialBasin.quartic(2.0, 1.0).h(r), 2.0 * (1 - r ** 4))

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            tr.parabolic_basin(0.0, 1.0)
        with pytest.raises(ValueError):
            tr.RadialBasin.flat(1.0, -1.0)
        with pytest.raises(ValueError):
            tr.RadialBasin.tabulated([(0.1, 1.0), (1.0, 0.0)])  # must start at 0
        with pytest.raises(ValueError):
            tr.RadialBasin.tabulated([(0.0, 1.0), (0.5, -0.1), (1.0, 0.0)])

    def test_tabulated_interpolation(self, tmp_path):
        path = tmp_path / "profile.txt"
        path.write_text("0.0 1.0\n0.5 0.6\n1.0 0.0\n")
        basin = tr.load_tabulated_basin(path)
        assert basin.r0 == 1.0
        assert basin.h(0.25) == pytest.approx(0.8)
        assert basin.in_regime


class TestRadialSloshEig:
    def test_parabolic_self_consistency(self):
        # the basin built from eigenvalue parameter nu* has lowest
        # m=1 eigenvalue exactly nu*
        for nu_star, r0 in [(0.5, 1.0), (1.0, 3.0)]:
            basin = tr.parabolic_basin(nu_star, r0)
            spectrum = tr.radial_slosh_eig(basin, m=1, n=2000)
            assert spectrum.values[0] == pytest.approx(nu_star, rel=1e-3)

    def test_flat_basin_disk_modes(self):
        # shallow water over constant depth reduces to the disk membrane
        # problem scaled by h0
        for h0, r0 in [(1.0, 1.0), (0.3, 2.0)]:
            basin = tr.RadialBasin.flat(h0, r0)
            spectrum = tr.radial_slosh_eig(basin, m=1, n=2000)
            assert spectrum.values[0] == pytest.approx(h0 * J1P1_SQ / r0 ** 2, rel=5e-3)

    @pytest.mark.parametrize("m", [1, 2])
    @pytest.mark.parametrize("profile", ["parabolic", "conical", "flat", "quartic"])
    def test_dense_oracle_small_grids(self, profile, m):
        basin = getattr(tr.RadialBasin, profile)(1.0, 1.0)
        n = 200
        spectrum = tr.radial_slosh_eig(basin, m=m, n=n, k=2)
        K, M = dense_radial_pair(basin, m, n)
        dense = linalg.eigh(K[1:, 1:], M[1:, 1:], eigvals_only=True)
        assert np.allclose(spectrum.values, dense[:len(spectrum.values)], rtol=1e-8)

    def test_m0_deflated_matches_dense(self):
        basin = tr.RadialBasin.flat(1.0, 1.0)
        n = 150
        spectrum = tr.radial_slosh_eig(basin, m=0, n=n, k=2)
        K, M = dense_radial_pair(basin, 0, n)
        dense = linalg.eigh(K, M, eigvals_only=True)
        nonzero = dense[np.abs(dense) > 1e-9]
        assert np.allclose(spectrum.values, nonzero[:len(spectrum.values)], rtol=1e-8)
        assert np.all(spectrum.values > 0.0)

    def test_eigenfunction_normalization_and_axis_condition(self):
        basin = tr.parabolic_basin(1.0, 1.0)
        spectrum = tr.radial_slosh_eig(basin, m=1, n=500)
        f = spectrum.eigenfunctions[:, 0]
        assert f[0] == 0.0
        _, M = dense_radial_pair(basin, 1, 500)
        assert f @ (M @ f) == pytest.approx(1.0, rel=1e-10)

    def test_symmetry_class_ordering(self):
        for profile in ("parabolic", "conical", "flat", "quartic"):
            basin = getattr(tr.RadialBasin, profile)(1.0, 1.0)
            nu_m1 = tr.radial_slosh_eig(basin, m=1, n=400).values[0]
            nu_m2 = tr.radial_slosh_eig(basin, m=2, n=400).values[0]
            assert nu_m1 <= nu_m2

    def test_depth_scaling(self):
        basin = tr.RadialBasin.conical(1.0, 1.0)
        scaled = tr.RadialBasin.conical(3.0, 1.0)
        nu = tr.radial_slosh_eig(basin, m=1, n=300).values[0]
        nu_scaled = tr.radial_slosh_eig(scaled, m=1, n=300).values[0]
        assert nu_scaled == pytest.approx(3.0 * nu, rel=1e-10)
        assert tr.troesch_bound(scaled) == pytest.approx(3.0 * tr.troesch_bound(basin),
                                                         rel=1e-10)

    def test_grid_convergence(self):
        basin = tr.RadialBasin.quartic(1.0, 1.0)
        nu_2000 = tr.radial_slosh_eig(basin, m=1, n=2000).values[0]
        nu_4000 = tr.radial_slosh_eig(basin, m=1, n=4000).values[0]
        assert abs(nu_4000 - nu_2000) / nu_2000 < 1e-4

    def test_input_validation(self):
        basin = tr.parabolic_basin(1.0, 1.0)
        with pytest.raises(ValueError):
            tr.radial_slosh_eig(basin, m=-1, n=200)
        with pytest.raises(ValueError):
            tr.radial_slosh_eig(basin, m=1, n=50)

    def test_nonpositive_profile_detected(self):
        # dry annulus: depth is exactly zero on [0.4, 0.6]
        basin = tr.RadialBasin.tabulated([(0.0, 1.0), (0.4, 0.0), (0.6, 0.0), (1.0, 1.0)])
        with pytest.raises(ValueError, match="nonpositive"):
            tr.radial_slosh_eig(basin, m=1, n=200)


class TestTroeschBound:
    def test_closed_forms(self):
        assert tr.troesch_bound(tr.parabolic_basin(1.0, 1.0)) == pytest.approx(1.0, rel=1e-12)
        assert tr.troesch_bound(tr.RadialBasin.flat(1.0, 1.0)) == pytest.approx(4.0, rel=1e-12)
        assert tr.troesch_bound(tr.RadialBasin.conical(1.0, 1.0)) == pytest.approx(4.0 / 3.0, rel=1e-10)
        assert tr.troesch_bound(tr.RadialBasin.quartic(1.0, 1.0)) == pytest.approx(8.0 / 3.0, rel=1e-10)


class TestVerify:
    def test_parabolic_equality(self):
        report = tr.verify_troesch(tr.parabolic_basin(1.0, 1.0), n=2000)
        assert abs(report.ratio - 1.0) < 1e-3
        assert report.equality
        assert report.in_regime

    def test_flat_ratio(self):
        report = tr.verify_troesch(tr.RadialBasin.flat(1.0, 1.0), n=2000)
        assert report.ratio == pytest.approx(J1P1_SQ / 4.0, rel=5e-3)
        assert not report.equality
        assert not report.in_regime

    def test_conical_strictly_below(self):
        report = tr.verify_troesch(tr.RadialBasin.conical(1.0, 1.0), n=1000)
        assert report.ratio < 1.0
        assert not report.equality
        assert report.in_regime
