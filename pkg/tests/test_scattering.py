import numpy as np
import pytest

from nnlslab.background import E_matrix, classify_ray
from nnlslab.scattering import (InitialProfile, SpectralTable, jost_at_origin,
                                reflection, scattering_data,
                                validate_assumptions)


class TestInitialProfile:
    def test_support_invariant(self):
        with pytest.raises(ValueError):
            InitialProfile(0.5, 2.0, np.array([0.9, 0.5, 0.9]))

    def test_gaussian_edges(self, verif_profile):
        q = verif_profile.q0(np.array([-verif_profile.support_L,
                                       verif_profile.support_L, 100.0]))
        assert np.abs(q - 0.5).max() < 1e-12

    def test_json_round_trip(self):
        prof = InitialProfile.from_json(
            {"preset": "gaussian_bump", "A": 0.5, "amplitude": -0.2,
             "width": 1.0, "chirp": 0.3, "center": 0.8}
        )
        assert prof.A == 0.5
        assert abs(prof.q0(0.8) - (0.5 - 0.2)) < 1e-12

    def test_json_samples(self):
        n = 11
        xs = np.linspace(-1, 1, n)
        vals = 0.5 + 0.1 * np.exp(-25 * xs**2)
        vals[0] = vals[-1] = 0.5
        obj = {"A": 0.5, "L": 1.0, "dx": 0.2,
               "samples": [[v, 0.0] for v in vals]}
        prof = InitialProfile.from_json(obj)
        assert prof.samples.size == n

    def test_box_preset(self):
        prof = InitialProfile.box(1.0, 0.3, 2.0)
        assert abs(prof.q0(0.0) - 1.3) < 1e-12
        assert abs(prof.q0(5.0) - 1.0) == 0.0


class TestJost:
    def test_pure_background_is_E(self, bg_profile):
        ks = np.array([0.5, -2.0, 1.3 + 0.8j, 3.0])
        psi = jost_at_origin(bg_profile, ks, side=1)
        assert np.abs(psi - E_matrix(ks, 1.0)).max() < 1e-12

    def test_unit_determinant(self, verif_profile):
        ks = np.array([0.7, -1.3, 2.4])
        for side in (1, 2):
            psi = jost_at_origin(verif_profile, ks, side=side)
            det = psi[:, 0, 0] * psi[:, 1, 1] - psi[:, 0, 1] * psi[:, 1, 0]
            assert np.abs(det - 1).max() < 1e-10

    def test_unit_determinant_on_cut(self, verif_profile):
        psi = jost_at_origin(verif_profile, 1j * np.array([0.3, -0.2]),
                             side=2, cut_side="minus")
        det = psi[:, 0, 0] * psi[:, 1, 1] - psi[:, 0, 1] * psi[:, 1, 0]
        assert np.abs(det - 1).max() < 1e-10

    def test_large_k_column_structure(self, verif_profile):
        psi = jost_at_origin(verif_profile, np.array([1e3 + 0j]), side=1)[0]
        assert abs(psi[0, 0] - 1) < 5e-3
        assert abs(psi[1, 0]) < 5e-3


class TestSpectralFunctions:
    def test_pure_background_identity(self, bg_profile):
        ks = np.linspace(-4, 4, 21)
        ks = ks[np.abs(ks) > 1e-9]
        a1, a2, b1, b2 = scattering_data(bg_profile, ks)
        assert np.abs(a1 - 1).max() < 1e-10
        assert np.abs(a2 - 1).max() < 1e-10
        assert max(np.abs(b1).max(), np.abs(b2).max()) < 1e-10

    def test_unimodularity(self, verif_profile):
        ks = np.linspace(-6, 6, 100)
        ks = ks[np.abs(ks) > 1e-9]
        a1, a2, b1, b2 = scattering_data(verif_profile, ks)
        assert np.abs(a1 * a2 + b1 * b2 - 1).max() < 1e-8

    def test_b_symmetry(self, verif_profile):
        ks = np.linspace(0.1, 5, 40)
        b2 = scattering_data(verif_profile, ks)[3]
        b1m = scattering_data(verif_profile, -ks)[2]
        assert np.abs(b2 - np.conj(b1m)).max() < 1e-8

    def test_a_symmetry_complex(self, verif_profile, rng):
        ks = rng.uniform(-2, 2, 10) + 1j * rng.uniform(0.1, 1.5, 10)
        a1 = scattering_data(verif_profile, ks)[0]
        a1m = scattering_data(verif_profile, -np.conj(ks))[0]
        assert np.abs(np.conj(a1m) - a1).max() < 1e-8
        a2 = scattering_data(verif_profile, np.conj(ks))[1]
        a2m = scattering_data(verif_profile, -ks)[1]
        assert np.abs(np.conj(a2m) - a2).max() < 1e-8

    def test_unimodularity_on_cut(self, verif_profile):
        y = np.linspace(-0.45, 0.45, 13)
        a1, a2, b1, b2 = scattering_data(verif_profile, 1j * y,
                                         cut_side="minus")
        assert np.abs(a1 * a2 + b1 * b2 - 1).max() < 1e-8

    def test_endpoint_growth_bounded(self, verif_profile):
        # (k - iA)^(1/2) * a_j stays bounded approaching iA along the cut
        A = verif_profile.A
        y = A * (1 - np.geomspace(1e-6, 1e-2, 10))
        a1 = scattering_data(verif_profile, 1j * y, cut_side="minus")[0]
        scaled = np.abs(np.sqrt(np.abs(1j * y - 1j * A)) * a1)
        assert scaled.max() < 10 * scaled.min() + 1.0

    def test_refinement_convergence(self, verif_profile):
        ks = np.array([0.6, -1.7])
        loose = scattering_data(verif_profile, ks, atol=1e-12, rtol=1e-11)
        tight = scattering_data(verif_profile, ks, atol=1e-13, rtol=5e-12)
        for u, v in zip(loose, tight):
            assert np.abs(u - v).max() < 1e-9

    def test_cauchy_reconstruction(self, verif_profile):
        # a1 - 1 is analytic and O(1/k) in the upper half plane away from
        # the cut sleeve: reconstruct interior values from boundary samples
        # via piecewise Gauss-Legendre along the closed contour
        A = verif_profile.A
        K, eps, s = 12.0, 1e-3, 1e-3
        verts = [-K + 1j * eps, -s + 1j * eps, -s + 1j * (A + s),
                 s + 1j * (A + s), s + 1j * eps, K + 1j * eps, K + 1j * K,
                 -K + 1j * K, -K + 1j * eps]
        x16, w16 = np.polynomial.legendre.leggauss(16)
        nodes, weights = [], []

        def add_piece(lo, hi):
            nodes.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * x16)
            weights.append(0.5 * (hi - lo) * w16)

        for a, b in zip(verts[:-1], verts[1:]):
            # the sqrt-type growth of a1 at iA sits a distance ~s from the
            # sleeve top: grade the subdivisions toward that corner
            near_a = abs(a - 1j * A) < 0.1
            near_b = abs(b - 1j * A) < 0.1
            if near_a or near_b:
                ts = np.concatenate(([0.0], 0.5 ** np.arange(12, -1, -1)))
                if near_b:
                    edges = a + (b - a) * (1 - ts[::-1])
                else:
                    edges = a + (b - a) * ts
                for lo, hi in zip(edges[:-1], edges[1:]):
                    add_piece(lo, hi)
            else:
                npieces = max(1, int(np.ceil(abs(b - a) / 0.75)))
                for j in range(npieces):
                    add_piece(a + (b - a) * j / npieces,
                              a + (b - a) * (j + 1) / npieces)
        nodes = np.concatenate(nodes)
        weights = np.concatenate(weights)
        vals = scattering_data(verif_profile, nodes, atol=1e-11,
                               rtol=1e-10)[0] - 1
        targets = np.array([0.4 + 0.9j, -1.1 + 1.4j, 0.8 + 2.2j])
        direct = scattering_data(verif_profile, targets)[0] - 1
        for k, ref in zip(targets, direct):
            cauchy = np.sum(weights * vals / (nodes - k)) / (2j * np.pi)
            assert abs(cauchy - ref) < 1e-6


class TestReflection:
    def test_pure_background_zero(self, bg_profile):
        r1, r2 = reflection(bg_profile, np.array([0.9, -2.2]))
        assert max(np.abs(r1).max(), np.abs(r2).max()) < 1e-10

    def test_bounded_near_endpoints(self, verif_profile):
        A = verif_profile.A
        y = A * (1 - np.geomspace(1e-5, 1e-1, 10))
        r1, r2 = reflection(verif_profile, 1j * y, cut_side="minus")
        assert np.abs(r1).max() < 50
        assert np.abs(r2).max() < 50

    def test_decay_on_real_axis(self, verif_profile):
        r1, r2 = reflection(verif_profile, np.array([1e3]))
        assert abs(1e3 * r1[0]) < 10
        assert abs(1e3 * r2[0]) < 10


class TestSpectralTable:
    def test_log_rr_matches_direct(self, verif_table):
        ks = np.array([-0.4, -1.3, -2.6])
        direct = np.log(verif_table.rr(ks))
        assert np.abs(verif_table.log_rr(ks) - direct).max() < 1e-9

    def test_tail_is_zero_extended(self, verif_table):
        assert verif_table.log_rr(-verif_table.k_tail * 3) == 0.0

    def test_winding_small_for_verif_profile(self, verif_table):
        assert verif_table.max_abs_winding(-1e-4) < 0.2


class TestValidateAssumptions:
    def test_verification_profile_clean(self, verif_table):
        ray = classify_ray(1.2, 0.5)
        rep = validate_assumptions(verif_table, ray)
        assert rep.zero_count_upper == 0
        assert rep.zero_count_lower == 0
        assert rep.winding_ok
        assert rep.max_abs_winding < np.pi

    def test_pure_background(self, bg_profile):
        rep = validate_assumptions(SpectralTable(bg_profile),
                                   classify_ray(2.0, 1.0))
        assert rep.zero_count_upper == 0
        assert rep.zero_count_lower == 0
        assert rep.max_abs_winding < 1e-10

    @pytest.mark.slow
    def test_engineered_zero_detected(self):
        # a raised centered bump carries a discrete zero just above iA
        prof = InitialProfile.gaussian_bump(0.5, 0.2, 1.0, chirp=0.3,
                                            center=0.0)
        tab = SpectralTable(prof)
        rep = validate_assumptions(tab, classify_ray(1.2, 0.5))
        assert rep.zero_count_upper >= 1
        # oracle: locate the zero by a dense 2-d scan of |a1| (it sits on the
        # imaginary axis just above iA, so mask only up to the cut endpoint)
        xs = np.linspace(-0.4, 0.4, 17)
        ys = np.linspace(0.45, 0.75, 17)
        KK = (xs[None, :] + 1j * ys[:, None]).ravel()
        KK = KK[~((np.abs(KK.real) < 0.03) & (KK.imag <= 0.505))]
        a1 = scattering_data(prof, KK, atol=1e-9, rtol=1e-8)[0]
        k_min = KK[np.argmin(np.abs(a1))]
        for it in range(3):
            loc = k_min + 0.5**it * 0.02 * (
                np.linspace(-1, 1, 9)[None, :] + 1j * np.linspace(-1, 1, 9)[:, None]
            ).ravel()
            loc = loc[loc.imag > 0.505]
            a1l = scattering_data(prof, loc, atol=1e-9, rtol=1e-8)[0]
            k_min = loc[np.argmin(np.abs(a1l))]
        assert np.abs(a1l).min() < 0.01
        # downstream ops refuse through the harness path
        from nnlslab.harness import RunConfig, run
        from nnlslab.simulator import SimGrid

        cfg = RunConfig(profile=prof, A=0.5, rays=[1.2], t_list=[2.0],
                        grid=SimGrid(L_box=32.0, N=1024, dt=0.004, t_max=2.0))
        rep2 = run(cfg)
        assert rep2.rays[0].skipped
        assert "zeros" in rep2.rays[0].reason
