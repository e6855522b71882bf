import numpy as np
import pytest

from covspec import (Contour, SpectralMeasure, closed_form_mp, contour_around_support,
                     contour_pair, cov_kernel, homogeneity_residual, proof_kernels,
                     solve_mbar)
from covspec.kernels import kernel_from_mbar

MP1 = SpectralMeasure.point(1.0)
H12 = SpectralMeasure([1.0, 2.0], [0.5, 0.5])


class TestCovKernel:
    def test_symmetry(self):
        a = cov_kernel(1 + 1j, 1 - 2j, MP1, 0.5)
        b = cov_kernel(1 - 2j, 1 + 1j, MP1, 0.5)
        assert a == b

    def test_conjugation(self):
        a = cov_kernel(0.8 + 0.7j, 2 + 0.3j, MP1, 0.5)
        b = cov_kernel(0.8 - 0.7j, 2 - 0.3j, MP1, 0.5)
        np.testing.assert_allclose(b, np.conj(a), rtol=1e-12)

    def test_against_quadratic_oracle(self):
        z1, z2, c = 1 + 1j, 1 - 2j, 0.5
        m1, m2 = closed_form_mp(z1, c), np.conj(closed_form_mp(np.conj(z2), c))
        expected = 2 * (z2 * m2 - z1 * m1) ** 2 / (c ** 2 * z1 * z2 * (z2 - z1) * (m2 - m1))
        assert abs(cov_kernel(z1, z2, MP1, c) - expected) <= 1e-10

    def test_complex_case_is_half(self):
        full = cov_kernel(1 + 1j, 2 + 0.5j, MP1, 0.5, case="real")
        half = cov_kernel(1 + 1j, 2 + 0.5j, MP1, 0.5, case="complex")
        assert half == full / 2

    def test_coincident_arguments_rejected(self):
        with pytest.raises(ValueError, match="offset"):
            cov_kernel(1 + 1j, 1 + 1j + 1e-10, MP1, 0.5)


class TestProofKernels:
    def test_integral_equals_algebraic(self):
        pk = proof_kernels(0.5 + 1j, 2 + 0.5j, MP1, 0.5)
        assert abs(pk.d_integral - pk.d_algebraic) <= 1e-9
        assert abs(pk.h_integral - pk.h_algebraic) <= 1e-9

    def test_random_pairs_both_populations(self):
        rng = np.random.default_rng(8)
        for h in (MP1, H12):
            for _ in range(25):
                z1 = complex(rng.uniform(0.2, 3), rng.uniform(0.2, 2))
                z2 = complex(rng.uniform(0.2, 3), -rng.uniform(0.2, 2))
                pk = proof_kernels(z1, z2, h, 0.5)
                assert abs(pk.d_integral - pk.d_algebraic) <= 1e-9
                assert abs(pk.h_integral - pk.h_algebraic) <= 1e-9

    def test_ratio_rebuilds_kernel(self):
        z1, z2, c = 0.5 + 1j, 2 + 0.5j, 0.5
        pk = proof_kernels(z1, z2, MP1, c)
        kernel_half = cov_kernel(z1, z2, MP1, c) / 2
        assert abs(pk.h / (1 - pk.d) - kernel_half) <= 1e-9

    def test_d_bounded_away_from_one_near_conjugate(self):
        z1 = 1.5 + 1j
        for delta in (0.5, 0.1, 0.01, 1e-3, 1e-5):
            pk = proof_kernels(z1, np.conj(z1) + delta, MP1, 0.5)
            assert abs(1 - pk.d) > 0.05


class TestHomogeneityResidual:
    def test_degenerate_vanishes(self):
        for t in (0.5, 1.0, 2.0, 3.0):
            h = SpectralMeasure.point(t)
            r = homogeneity_residual(1 + 1j, 2 + 1j, h, 0.5)
            assert abs(r) <= 1e-14

    def test_two_atom_nonzero(self):
        r = homogeneity_residual(1 + 1j, 2 + 1j, H12, 0.5)
        assert abs(r) > 1e-4

    def test_conjugate_pair_positive(self):
        r = homogeneity_residual(1 + 1j, 1 - 1j, H12, 0.5)
        assert abs(r.imag) <= 1e-14
        assert r.real > 0


class TestContour:
    def test_validation(self):
        with pytest.raises(ValueError):
            Contour(u_l=1.0, u_r=0.5, v0=1.0)
        with pytest.raises(ValueError, match="resolution"):
            Contour(u_l=0.0, u_r=1.0, v0=1.0, nodes_per_side=32)

    def test_around_support(self):
        cont = contour_around_support(MP1, 0.25)
        assert cont.u_l < 0.25 and cont.u_r > 2.25 and cont.u_l > 0
        cont2 = contour_around_support(MP1, 2.0)
        assert cont2.u_l < 0

    def test_nodes_conjugate_symmetric(self):
        z, w = contour_around_support(MP1, 0.25, nodes_per_side=128).nodes()
        # every node's conjugate is a node too
        nearest = np.abs(np.conj(z)[:, None] - z[None, :]).min(axis=1)
        assert nearest.max() <= 1e-12
        assert np.all(z.imag != 0)
        # closed path: weights sum to zero
        assert abs(w.sum()) <= 1e-12

    def test_winding_integral(self):
        # trapezoid nodes integrate 1/(z - a) to 2*pi*i for a inside
        cont = Contour(u_l=-1.0, u_r=1.0, v0=1.0, nodes_per_side=1024)
        z, w = cont.nodes()
        for a in (0.0, 0.5 + 0.2j, -0.7 - 0.4j):
            val = np.sum(w / (z - a))
            assert abs(val - 2j * np.pi) <= 1e-6
        outside = np.sum(w / (z - 3.0))
        assert abs(outside) <= 1e-6

    def test_nesting(self):
        outer, inner = contour_pair(MP1, 0.5)
        assert outer.encloses(inner)
        assert not outer.intersects(inner)
        shifted = Contour(u_l=outer.u_l, u_r=outer.u_r, v0=inner.v0)
        assert shifted.intersects(outer)


def test_kernel_from_mbar_broadcasts():
    z1 = np.array([1 + 1j, 2 + 1j])
    z2 = np.array([1 - 1j, 3 - 0.5j])
    m1 = np.array([solve_mbar(z, MP1, 0.5).mbar for z in z1])
    m2 = np.array([solve_mbar(z, MP1, 0.5).mbar for z in z2])
    grid = kernel_from_mbar(z1[:, None], m1[:, None], z2[None, :], m2[None, :], 0.5)
    assert grid.shape == (2, 2)
    one = cov_kernel(z1[0], z2[1], MP1, 0.5)
    np.testing.assert_allclose(grid[0, 1], one, rtol=1e-10)
