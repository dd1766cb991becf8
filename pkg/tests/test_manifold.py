import numpy as np
import pytest
from scipy.integrate import quad as quad1d

from blgeom import (Euclidean, InputError, PolytopeGauge, berwald_defect,
                    bl_field, conformal_factor, conformal_rescale,
                    constant_structure, default_loops, default_probes,
                    fingerprint_cloud, holonomy_angle, holonomy_extension,
                    is_locally_minkowski, l1_l2_interpolation,
                    parallel_transport, rectangle_loop, rigid_motion,
                    rotor_structure, smoothstep, square_gauge)
from blgeom import catalog
from oracles import conformal_christoffel


def sin_factor(x):
    return 1.0 + 0.3 * np.sin(x[0])


@pytest.fixture(scope="module")
def interp_field():
    return bl_field(l1_l2_interpolation(), shape=(49, 17))


class TestStructures:
    def test_smoothstep_endpoints(self):
        t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
        f = smoothstep(t)
        assert f[0] == 0.0 and f[1] == 0.0
        assert f[3] == 1.0 and f[4] == 1.0
        assert 0.0 < f[2] < 1.0

    def test_interpolation_endpoint_norms(self):
        st = l1_l2_interpolation()
        assert st.norm_at([-0.5, 0.0])([1.0, 1.0]) == pytest.approx(2.0)
        assert st.norm_at([1.5, 0.0])([1.0, 1.0]) == pytest.approx(np.sqrt(2.0))

    def test_norm_oracle_validates_everywhere(self):
        for name in catalog.BUILTIN_STRUCTURES:
            st = catalog.builtin_structure(name)
            for x, report in st.validate_samples(count=3, samples=200):
                assert report.ok, (name, x)

    def test_degenerate_chart_rejected(self):
        with pytest.raises(InputError):
            constant_structure(square_gauge(), lo=(0.0, 0.0), hi=(0.0, 1.0))


class TestField:
    def test_constant_field_values(self):
        field = bl_field(constant_structure(square_gauge()), shape=(9, 9))
        np.testing.assert_allclose(field.values[..., 0, 0], 0.75, atol=1e-10)
        np.testing.assert_allclose(field.at([0.21, -0.37]),
                                   0.75 * np.eye(2), atol=1e-10)

    def test_interpolation_field_endpoint_values(self, interp_field):
        # pure 1-norm region carries 1.5 I, pure 2-norm region the identity
        np.testing.assert_allclose(interp_field.values[0, 0],
                                   1.5 * np.eye(2), atol=1e-9)
        np.testing.assert_allclose(interp_field.values[-1, 0],
                                   np.eye(2), atol=1e-9)

    def test_interpolation_field_is_isotropic(self, interp_field):
        # axis reflections and the coordinate swap force a multiple of I
        assert np.abs(interp_field.values[..., 0, 1]).max() < 1e-6
        aniso = np.abs(interp_field.values[..., 0, 0]
                       - interp_field.values[..., 1, 1])
        assert aniso.max() < 1e-6

    def test_interpolation_field_continuity(self, interp_field):
        h = float(interp_field.spacing.max())
        assert interp_field.neighbor_variation() < 2.5 * h

    def test_conformal_field_law(self):
        base = constant_structure(square_gauge())
        scaled = conformal_rescale(base, sin_factor)
        fa = bl_field(scaled, shape=(9, 9))
        fb = bl_field(base, shape=(9, 9))
        same = conformal_factor(fb, fb)
        assert same.residual == 0.0
        np.testing.assert_allclose(same.factor, 1.0, atol=1e-12)
        res = conformal_factor(fa, fb)
        assert res.conformal and res.residual < 1e-6
        xs = fa.axes[0]
        np.testing.assert_allclose(res.factor[:, 0], 1.0 + 0.3 * np.sin(xs),
                                   atol=1e-5)

    def test_interpolation_vs_constant_l1_is_conformal(self, interp_field):
        # both fields are multiples of the identity, so they ARE conformal;
        # the recovered factor interpolates from 1 down to sqrt(1/1.5)
        const_l1 = constant_structure(catalog.builtin_norm("diamond-l1"),
                                      lo=(-1.0, -1.0), hi=(2.0, 1.0))
        fb = bl_field(const_l1, shape=(49, 17))
        res = conformal_factor(interp_field, fb)
        assert res.conformal and res.residual < 1e-6
        assert res.factor[0, 0] == pytest.approx(1.0, abs=1e-9)
        assert res.factor[-1, 0] == pytest.approx(np.sqrt(1.0 / 1.5), abs=1e-9)

    def test_conformal_negative_case(self):
        # rotating square field is isotropic, the stretched norm is not
        rot = bl_field(rotor_structure({"kind": "linear", "slope": 0.8}),
                       shape=(9, 9))
        aniso = bl_field(constant_structure(Euclidean(np.diag([1.0, 4.0]))),
                         shape=(9, 9))
        res = conformal_factor(rot, aniso)
        assert not res.conformal and res.residual > 0.1

    def test_lattice_mismatch_rejected(self):
        fa = bl_field(constant_structure(square_gauge()), shape=(9, 9))
        fb = bl_field(constant_structure(square_gauge()), shape=(11, 9))
        with pytest.raises(InputError):
            conformal_factor(fa, fb)


class TestChristoffel:
    def test_constant_field_zero(self):
        field = bl_field(constant_structure(square_gauge()), shape=(9, 9))
        assert np.abs(field.christoffel([0.1, 0.1])).max() < 1e-12

    def test_conformal_closed_form(self):
        # metric exp(2 x1) I; phi gradient (1, 0)
        st = conformal_rescale(
            constant_structure(Euclidean(np.eye(2)), lo=(-1, -1), hi=(1, 1)),
            lambda x: float(np.exp(x[0])))
        field = bl_field(st, shape=(33, 33))
        h = field.spacing.max()
        got = field.christoffel([0.2, -0.1])
        want = conformal_christoffel([1.0, 0.0])
        assert np.abs(got - want).max() < h ** 2

    def test_symmetry_in_lower_indices(self, interp_field):
        gam = interp_field.christoffel([0.5, 0.0])
        np.testing.assert_array_equal(gam, np.transpose(gam, (0, 2, 1)))

    def test_boundary_margin_enforced(self, interp_field):
        with pytest.raises(InputError):
            interp_field.christoffel([-0.99, 0.0])

    def test_riemann_of_conformal_field(self):
        # R^1_212 = -phi'' for exp(2 phi(x1)) I; here phi'' = -0.3 sin at 0...
        st = conformal_rescale(
            constant_structure(Euclidean(np.eye(2)), lo=(-1.5, -1.5), hi=(1.5, 1.5)),
            sin_factor)
        field = bl_field(st, shape=(41, 41))
        x = np.array([0.6, 0.0])
        s, c = np.sin(x[0]), np.cos(x[0])
        lam = 1.0 + 0.3 * s
        phipp = (-0.3 * s * lam - (0.3 * c) ** 2) / lam ** 2
        got = field.riemann(x)[0, 1, 0, 1]  # R^1_{2,1,2} component ordering l,k,i,j
        assert got == pytest.approx(-phipp, abs=5e-3)


class TestTransport:
    def test_constant_field_is_identity(self):
        field = bl_field(constant_structure(square_gauge()), shape=(9, 9))
        loop = rectangle_loop([0.0, 0.0], [0.4, 0.4])
        res = parallel_transport(field, loop, np.eye(2))
        np.testing.assert_allclose(res.transported_frame, np.eye(2), atol=1e-12)
        assert res.gram_residual < 1e-12

    def test_holonomy_matches_curvature_integral(self):
        st = conformal_rescale(
            constant_structure(Euclidean(np.eye(2)), lo=(-1.5, -1.5), hi=(1.5, 1.5)),
            sin_factor)
        field = bl_field(st, shape=(41, 41))
        loop = rectangle_loop([0.0, 0.0], [0.5, 0.5])
        res = parallel_transport(field, loop, np.eye(2))

        def phipp(x):
            s, c = np.sin(x), np.cos(x)
            lam = 1.0 + 0.3 * s
            return (-0.3 * s * lam - (0.3 * c) ** 2) / lam ** 2

        want = -quad1d(phipp, -0.5, 0.5)[0]  # times the loop's y-extent, 1.0
        assert holonomy_angle(field, res) == pytest.approx(want, abs=1e-4)

    def test_flat_conformal_field_has_trivial_holonomy(self):
        # exp(2 x1) I is flat (phi harmonic); the residual angle is the
        # O(h^4) interpolation error of the lattice field, not transport error
        st = conformal_rescale(
            constant_structure(Euclidean(np.eye(2)), lo=(-1, -1), hi=(1, 1)),
            lambda x: float(np.exp(x[0])))
        field = bl_field(st, shape=(33, 33))
        loop = rectangle_loop([0.0, 0.0], [0.4, 0.4])
        res = parallel_transport(field, loop, np.eye(2))
        h = float(field.spacing.max())
        assert abs(holonomy_angle(field, res)) < 2.0 * h ** 4

    def test_reversal_inverts(self, interp_field):
        loop = rectangle_loop([0.125, 0.0], [0.375, 0.5])
        fwd = parallel_transport(interp_field, loop, np.eye(2))
        back = parallel_transport(interp_field, loop[::-1], fwd.transported_frame)
        np.testing.assert_allclose(back.transported_frame, np.eye(2), atol=1e-8)

    def test_gram_preserved(self, interp_field):
        probes = default_probes(2)
        loop = rectangle_loop([0.125, 0.0], [0.375, 0.5])
        res = parallel_transport(interp_field, loop, probes)
        assert res.gram_residual < 1e-6

    def test_bad_path_rejected(self, interp_field):
        with pytest.raises(InputError):
            parallel_transport(interp_field, np.array([[0.0, 0.0]]), np.eye(2))


class TestBerwald:
    def test_constant_structure(self):
        rep = berwald_defect(constant_structure(square_gauge()), shape=(17, 17))
        assert rep.defect < 1e-6
        assert rep.gram_residual < 1e-6

    def test_interpolation_structure(self, interp_field):
        loop = rectangle_loop([0.125, 0.0], [0.375, 0.5])
        rep = berwald_defect(l1_l2_interpolation(), loops=[loop],
                             field=interp_field)
        assert rep.defect > 1e-2

    def test_rotor_defect_iff_nonconstant(self):
        moving = berwald_defect(
            rotor_structure({"kind": "linear", "slope": 0.8, "offset": 0.1}),
            shape=(17, 17))
        frozen = berwald_defect(rotor_structure({"kind": "constant", "value": 0.4}),
                                shape=(17, 17))
        assert moving.defect > 1e-4
        assert frozen.defect < 1e-6

    def test_default_loops_stay_inside(self):
        st = constant_structure(square_gauge())
        for loop in default_loops(st, margin=0.2):
            assert st.contains(loop.min(axis=0), margin=0.19)
            assert st.contains(loop.max(axis=0), margin=0.19)


class TestLocallyMinkowski:
    def test_constant_positive(self):
        rep = is_locally_minkowski(constant_structure(square_gauge()),
                                   shape=(17, 17))
        assert rep.locally_minkowski
        assert rep.verdict == "locally Minkowski"

    def test_holonomy_extension_positive(self):
        rep = is_locally_minkowski(holonomy_extension(square_gauge()),
                                   shape=(17, 17))
        assert rep.locally_minkowski

    def test_interpolation_negative_by_curvature(self):
        rep = is_locally_minkowski(l1_l2_interpolation(), shape=(33, 17))
        assert not rep.locally_minkowski
        assert rep.flat_residual > rep.flat_tol

    def test_rotor_negative_by_berwald_only(self):
        rep = is_locally_minkowski(
            rotor_structure({"kind": "linear", "slope": 0.8, "offset": 0.1}),
            shape=(17, 17))
        assert not rep.locally_minkowski
        assert rep.flat_residual < rep.flat_tol
        assert rep.berwald_defect > rep.berwald_tol


class TestEquivariance:
    def test_rigid_motion_of_field(self):
        angle = np.pi / 5.0
        rot = np.array([[np.cos(angle), -np.sin(angle)],
                        [np.sin(angle), np.cos(angle)]])
        shift = np.array([0.4, -0.1])
        base = constant_structure(PolytopeGauge([[2.0, -1.0], [-1.0, 2.0],
                                                 [-1.0, -1.0]]))
        moved = rigid_motion(base, rot, shift)
        x = np.array([0.15, -0.2])
        g = bl_field(base, shape=(9, 9)).at(x)
        g_moved = bl_field(moved, shape=(9, 9)).at(rot @ x + shift)
        np.testing.assert_allclose(g_moved, rot @ g @ rot.T, rtol=1e-6)

    def test_translation_only(self):
        base = l1_l2_interpolation()
        moved = rigid_motion(base, np.eye(2), [0.5, 0.5])
        x = np.array([0.3, 0.1])
        g = bl_field(base, shape=(13, 9)).at(x)
        g_moved = bl_field(moved, shape=(13, 9)).at(x + 0.5)
        np.testing.assert_allclose(g_moved, g, rtol=1e-6, atol=1e-9)


class TestThreeDimensional:
    def test_constant_3d_field_end_to_end(self):
        norm = Euclidean(np.diag([1.0, 2.0, 0.5]))
        st = constant_structure(norm, lo=(-1, -1, -1), hi=(1, 1, 1))
        field = bl_field(st, shape=(7, 7, 7))
        np.testing.assert_allclose(field.at([0.1, -0.2, 0.3]),
                                   np.diag([1.0, 2.0, 0.5]), atol=1e-8)
        assert np.abs(field.christoffel([0.0, 0.0, 0.0])).max() < 1e-10
        loop = rectangle_loop(np.zeros(3), 0.3 * np.ones(3), axes=(0, 2))
        res = parallel_transport(field, loop, np.eye(3))
        np.testing.assert_allclose(res.transported_frame, np.eye(3), atol=1e-9)

    def test_berwald_defect_3d_constant(self):
        st = constant_structure(Euclidean(np.eye(3)), lo=(-1, -1, -1),
                                hi=(1, 1, 1))
        rep = berwald_defect(st, shape=(7, 7, 7))
        assert rep.defect < 1e-8

    def test_loops_cover_coordinate_planes(self):
        st = constant_structure(Euclidean(np.eye(3)), lo=(-1, -1, -1),
                                hi=(1, 1, 1))
        loops = default_loops(st, margin=0.2, scales=(0.5,))
        assert len(loops) == 3
        spans = [np.ptp(loop, axis=0) > 1e-12 for loop in loops]
        assert sorted(tuple(s) for s in spans) == [
            (False, True, True), (True, False, True), (True, True, False)]


class TestFingerprintCloud:
    def test_cloud_shape_and_conformal_invariance(self):
        st = l1_l2_interpolation()
        pts, cloud = fingerprint_cloud(st, grid=(5, 2))
        assert pts.shape == (10, 2) and cloud.shape == (10, 4)
        scaled = conformal_rescale(st, sin_factor)
        _, cloud2 = fingerprint_cloud(scaled, grid=(5, 2))
        np.testing.assert_allclose(cloud2, cloud, rtol=1e-6)
