import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from threewave import (
    Classification,
    FieldTriple,
    GeometryError,
    PhysParams,
    RadialGrid,
    ResolutionError,
    SubcriticalityError,
    classify_pohozaev,
    coupling,
    dilate,
    energy,
    energy_limit,
    fiber,
    fiber_critical_points,
    fiber_integrals,
    geometry_constants,
    in_M,
    masses,
    pohozaev,
    threshold_D,
    threshold_D0,
)
from threewave.functionals import energy_single, h_function
from threewave.reference_solutions import single_soliton
from threewave.variational_solvers import project_masses

GRID = RadialGrid(30.0, 1023)


def bumps(seed, grid=GRID, complex_=False):
    """Three smooth decaying profiles built from random Gaussian bumps."""
    rng = np.random.default_rng(seed)
    r = grid.r
    out = np.zeros((3, grid.n), dtype=complex if complex_ else float)
    for j in range(3):
        for _ in range(3):
            amp, width, centre = rng.uniform(0.2, 1.5), rng.uniform(1.0, 3.0), rng.uniform(0.0, 3.0)
            prof = amp * (np.exp(-((r - centre) / width) ** 2) + np.exp(-((r + centre) / width) ** 2))
            if complex_:
                prof = prof * np.exp(1j * rng.uniform(0, 2 * np.pi))
            out[j] += prof
    return out


seeds = st.integers(0, 2**31 - 1)


class TestEnergy:
    def test_zero(self):
        z = FieldTriple(GRID, np.zeros((3, GRID.n)))
        assert energy(z, 1.0) == 0.0
        assert energy_limit(z, 1.0) == 0.0
        assert pohozaev(z, 1.0) == 0.0
        assert masses(z) == (0.0, 0.0)
        assert coupling(z) == 0.0

    def test_no_coupling_without_u3(self):
        d = bumps(1)
        d[2] = 0.0
        u = FieldTriple(GRID, d)
        f = fiber_integrals(u)
        assert f.cubic == 0.0
        assert energy(u, 5.0) == pytest.approx(0.5 * f.grad_sq - f.sextic / 6.0, rel=1e-15)

    @given(seed=seeds, alpha=st.floats(0.1, 10.0))
    @settings(max_examples=30, deadline=None)
    def test_energy_splits_into_limit_and_sextic(self, seed, alpha):
        u = FieldTriple(GRID, bumps(seed))
        f = fiber_integrals(u)
        assert energy(u, alpha) == pytest.approx(energy_limit(u, alpha) - f.sextic / 6.0, rel=1e-12, abs=1e-12)

    def test_symmetric_soliton_against_termwise_quadrature(self, soliton):
        # v = (lam/alpha) W(sqrt(lam) r) at mass a^2/2; each term is a scaled integral of W,
        # integrated exactly piece by piece on the spline and by quad on the exponential tail
        alpha, a = 8.0, 1.3
        grid = RadialGrid(60.0, 4095)
        lam, v = single_soliton(alpha, a / np.sqrt(2), grid, soliton)
        u = FieldTriple(grid, np.stack([v, v, v]))
        spl, rs, amp = soliton._spline, soliton.splice_radius, soliton.tail_amplitude
        dspl = spl.derivative()
        knots = spl.x[(spl.x >= 0) & (spl.x < rs)]
        knots = np.append(knots, rs)
        t, w = np.polynomial.legendre.leggauss(12)
        lo, hi = knots[:-1, None], knots[1:, None]
        r = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
        wr = 4 * np.pi * r**2 * 0.5 * (hi - lo) * w

        def whole(inner, outer):
            tail = quad(lambda x: 4 * np.pi * x**2 * outer(x), rs, np.inf, epsabs=0, epsrel=1e-13)[0]
            return float(np.sum(wr * inner(r))) + tail

        w_tail = lambda x: amp * np.exp(-x) / x
        dw_tail = lambda x: -amp * np.exp(-x) * (1 / x + 1 / x**2)
        w_grad = whole(lambda x: dspl(x) ** 2, lambda x: dw_tail(x) ** 2)
        w_cub = whole(lambda x: spl(x) ** 3, lambda x: w_tail(x) ** 3)
        w_six = whole(lambda x: spl(x) ** 6, lambda x: w_tail(x) ** 6)
        grad = 3 * lam**1.5 / alpha**2 * w_grad
        sext = 3 * lam**4.5 / alpha**6 * w_six
        cub = lam**1.5 / alpha**3 * w_cub
        oracle = 0.5 * grad - sext / 6.0 - alpha * cub
        assert energy(u, alpha) == pytest.approx(oracle, rel=1e-10)

    def test_limit_energy_of_symmetric_triple(self, soliton):
        alpha, a = 4.0, 2.0
        grid = RadialGrid(80.0, 4095)
        _, v = single_soliton(alpha, a, grid, soliton)
        u = FieldTriple(grid, np.stack([v, v, v]))
        assert energy_limit(u, alpha) == pytest.approx(3.0 * energy_single(v, grid, alpha), rel=1e-12)

    @pytest.mark.parametrize("th1, th2", [(0.3, 1.1), (1.1, np.pi), (np.pi, 0.3)])
    def test_gauge_invariance(self, th1, th2):
        d = bumps(7, complex_=True)
        u = FieldTriple(GRID, d)
        ph = np.exp(1j * np.array([th1, th2, th1 + th2]))[:, None]
        v = FieldTriple(GRID, ph * d)
        for fn in (lambda w: energy(w, 1.7), lambda w: energy_limit(w, 1.7), lambda w: pohozaev(w, 1.7)):
            assert fn(v) == pytest.approx(fn(u), rel=1e-12)
        assert masses(v) == pytest.approx(masses(u), rel=1e-12)


class TestMasses:
    def test_only_u3(self):
        d = bumps(2)
        d[:2] = 0.0
        q1, q2 = masses(FieldTriple(GRID, d))
        assert q1 == q2 == pytest.approx(GRID.mass(d[2]))

    @given(seed=seeds)
    @settings(max_examples=20, deadline=None)
    def test_mixed_mass_algebra(self, seed):
        d = bumps(seed)
        q1, q2 = masses(FieldTriple(GRID, d))
        total = sum(GRID.mass(c) for c in d)
        assert q1 + q2 - total == pytest.approx(GRID.mass(d[2]), rel=1e-12)


class TestCoupling:
    def test_nonnegative_triple_in_M(self):
        assert in_M(FieldTriple(GRID, np.abs(bumps(3))))

    def test_flip_u3(self):
        d = bumps(4)
        u = FieldTriple(GRID, d)
        d2 = d.copy()
        d2[2] *= -1
        assert coupling(FieldTriple(GRID, d2)) == -coupling(u)
        assert not in_M(FieldTriple(GRID, d2))

    def test_zero_coupling_not_in_M(self):
        d = bumps(5)
        d[1] = 0.0
        assert not in_M(FieldTriple(GRID, d))

    @given(seed=seeds, alpha=st.floats(0.2, 5.0))
    @settings(max_examples=30, deadline=None)
    def test_gn_bound_and_h_lower_bound(self, seed, alpha, soliton, c_sob):
        # on S(a1, a2): alpha |C| <= A2 rho^{3/2} and E >= h(rho), rho = ||grad u||
        a1, a2 = np.random.default_rng(seed).uniform(0.3, 2.0, 2)
        d = project_masses(GRID, bumps(seed), a1, a2)
        u = FieldTriple(GRID, d)
        params = PhysParams(alpha, a1, a2)
        D0 = threshold_D0(alpha, soliton.norm, c_sob)
        if params.a_max >= D0:
            return
        geo = geometry_constants(params, soliton.norm, c_sob)
        f = fiber_integrals(u)
        rho = np.sqrt(f.grad_sq)
        assert alpha * abs(f.cubic) <= geo.A2 * rho**1.5
        assert energy(u, alpha) >= h_function(rho, geo.A1, geo.A2)


class TestDilation:
    def test_identity(self):
        u = FieldTriple(GRID, bumps(6))
        assert np.array_equal(dilate(u, 1.0).data, u.data)

    def test_masses_preserved(self):
        g = RadialGrid(40.0, 4095)
        u = FieldTriple(g, bumps(8, g))
        v = dilate(u, 2.0)
        assert masses(v) == pytest.approx(masses(u), rel=1e-8)

    def test_gradient_scaling_gaussian(self):
        g = RadialGrid(30.0, 4095)
        gauss = np.exp(-g.r**2 / 2)
        u = FieldTriple(g, np.stack([gauss, 0.5 * gauss, 0.2 * gauss]))
        v = dilate(u, 1.7)
        assert fiber_integrals(v).grad_sq == pytest.approx(1.7**2 * fiber_integrals(u).grad_sq, rel=1e-8)

    @given(seed=seeds, s=st.floats(0.5, 2.0), alpha=st.floats(0.2, 5.0))
    @settings(max_examples=25, deadline=None)
    def test_fiber_identities(self, seed, s, alpha):
        g = RadialGrid(60.0, 4095)
        u = FieldTriple(g, bumps(seed, g))
        v = dilate(u, s)
        psi, dpsi, _ = fiber(u, alpha, s)
        scale = fiber_integrals(u).grad_sq + fiber_integrals(u).sextic
        assert masses(v) == pytest.approx(masses(u), rel=1e-8)
        assert energy(v, alpha) == pytest.approx(psi, abs=1e-8 * scale * s**6)
        assert pohozaev(v, alpha) == pytest.approx(s * dpsi, abs=1e-8 * scale * s**6)

    def test_pushed_through_wall(self):
        u = FieldTriple(GRID, bumps(9))
        with pytest.raises(ResolutionError):
            dilate(u, 0.1)


class TestFiber:
    def test_value_at_one(self):
        u = FieldTriple(GRID, bumps(10))
        assert fiber(u, 1.3, 1.0)[0] == pytest.approx(energy(u, 1.3), rel=1e-14)

    @pytest.mark.parametrize("s", [0.5, 0.7, 1.0, 2.0])
    def test_pohozaev_is_s_times_slope(self, s):
        g = RadialGrid(60.0, 4095)
        u = FieldTriple(g, bumps(11, g))
        assert pohozaev(dilate(u, s), 0.8) == pytest.approx(s * fiber(u, 0.8, s)[1], rel=1e-7)

    def test_small_s_negative(self):
        u = FieldTriple(GRID, np.abs(bumps(12)))
        s = 1e-3
        psi = fiber(u, 1.0, s)[0]
        lead = -(s**1.5) * fiber_integrals(u).cubic
        # the s^2 kinetic term is the first correction
        assert psi < 0
        assert psi == pytest.approx(lead, rel=10 * np.sqrt(s))

    @given(s=st.floats(0.1, 5.0))
    @settings(max_examples=30, deadline=None)
    def test_derivatives_match_differences(self, s):
        u = FieldTriple(GRID, np.abs(bumps(13)))
        h = 1e-5 * s
        p_lo, d_lo, _ = fiber(u, 1.0, s - h)
        p_hi, d_hi, _ = fiber(u, 1.0, s + h)
        _, d, d2 = fiber(u, 1.0, s)
        assert (p_hi - p_lo) / (2 * h) == pytest.approx(d, rel=1e-5, abs=1e-6)
        assert (d_hi - d_lo) / (2 * h) == pytest.approx(d2, rel=1e-5, abs=1e-6)


class TestClassify:
    def test_random_off_set(self):
        u = FieldTriple(GRID, bumps(14))
        assert classify_pohozaev(u, 1.0) == Classification.NOT_ON_P

    @given(seed=seeds, alpha=st.floats(0.5, 3.0))
    @settings(max_examples=20, deadline=None)
    def test_dilations_to_critical_points(self, seed, alpha):
        g = RadialGrid(60.0, 4095)
        u = FieldTriple(g, 0.3 * np.abs(bumps(seed, g)))
        try:
            fa = fiber_critical_points(u, alpha)
        except GeometryError:
            return
        assert fa.s_u < fa.c_u < fa.sigma_u < fa.d_u
        assert fa.psi_at_s < 0 < fa.psi_at_sigma
        # dilate only when the rescaled profile is resolved
        for s, expect in ((fa.s_u, Classification.PLUS), (fa.sigma_u, Classification.MINUS)):
            try:
                v = dilate(u, s)
            except ResolutionError:
                continue
            assert classify_pohozaev(v, alpha, tol=1e-5) == expect

    def test_ground_state_plus(self, ground_half):
        assert classify_pohozaev(ground_half.u, ground_half.alpha) == Classification.PLUS
        fa = fiber_critical_points(ground_half.u, ground_half.alpha)
        assert fa.s_u == pytest.approx(1.0, abs=1e-10)

    def test_s_u_below_R0(self, ground_half, soliton, c_sob):
        gs = ground_half
        geo = geometry_constants(PhysParams(gs.alpha, gs.a1, gs.a2), soliton.norm, c_sob)
        u = FieldTriple(gs.u.grid, 2.0 * gs.u.data[:, :])
        u = FieldTriple(gs.u.grid, project_masses(gs.u.grid, u.data, gs.a1, gs.a2))
        fa = fiber_critical_points(u, gs.alpha)
        assert fa.s_u < geo.R0 / np.sqrt(fiber_integrals(u).grad_sq)

    def test_outside_M_raises(self):
        d = bumps(15)
        d[2] = -np.abs(d[2])
        d[:2] = np.abs(d[:2])
        with pytest.raises(GeometryError):
            fiber_critical_points(FieldTriple(GRID, d), 1.0)


class TestGeometry:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_D_below_D0(self, alpha, soliton, c_sob):
        assert threshold_D(alpha, soliton.norm, c_sob) < threshold_D0(alpha, soliton.norm, c_sob)

    @pytest.mark.parametrize("frac", [0.1, 0.5, 0.9])
    def test_hump(self, frac, soliton, c_sob, D1):
        geo = geometry_constants(PhysParams(1.0, frac * D1, 0.5 * frac * D1), soliton.norm, c_sob)
        h = lambda x: h_function(x, geo.A1, geo.A2)
        scale = geo.rho0**2
        assert abs(h(geo.R0)) < 1e-10 * scale and abs(h(geo.R1)) < 1e-10 * scale
        inside = np.linspace(geo.R0, geo.R1, 102)[1:-1]
        assert np.all(h(inside) > 0)
        assert geo.R0 < geo.rho0 < geo.R1

    def test_degenerate_at_D(self, soliton, c_sob, D1):
        geo = geometry_constants(PhysParams(1.0, D1, D1), soliton.norm, c_sob)
        assert abs(geo.R0 - geo.rho0) < 1e-6 and abs(geo.R1 - geo.rho0) < 1e-6
        assert abs(h_function(geo.rho0, geo.A1, geo.A2)) < 1e-6 * geo.rho0**2

    def test_between_D_and_D0(self, soliton, c_sob, D1):
        D0 = threshold_D0(1.0, soliton.norm, c_sob)
        geo = geometry_constants(PhysParams(1.0, 0.5 * (D1 + D0), 0.1), soliton.norm, c_sob)
        assert geo.R0 is None and geo.R1 is None

    def test_collapse_at_D0(self, soliton, c_sob):
        D0 = threshold_D0(1.0, soliton.norm, c_sob)
        with pytest.raises(GeometryError, match="geometry collapse"):
            geometry_constants(PhysParams(1.0, D0, 0.1), soliton.norm, c_sob)

    def test_subcriticality_gate(self, D1):
        with pytest.raises(SubcriticalityError, match="subcriticality violated"):
            PhysParams(1.0, 1.01 * D1, 0.1).require_subcritical(D1)
        PhysParams(1.0, 0.99 * D1, 0.1).require_subcritical(D1)

    @pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
    def test_params_validated(self, bad):
        from threewave import InputError

        with pytest.raises(InputError):
            PhysParams(bad, 1.0, 1.0)
