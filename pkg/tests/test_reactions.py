import numpy as np
import pytest

from sgip.core import GridSpec
from sgip.reactions import (
    Arrhenius,
    BackwardEuler,
    ClosedForm,
    CrankNicolson,
    Cubic,
    FKPP,
    Linear,
    Polynomial,
    ReactionError,
    integrate_reaction_field,
    rate,
    rate_derivative,
    react_backward_euler,
    react_closed_form,
    react_crank_nicolson,
)

from conftest import make_field

ALL_MODELS = [FKPP(), Linear(0.7), Cubic(), Arrhenius(0.5), Polynomial((0.1, -0.3, 0.2))]


def observed_order(integrate, u0: float = 0.3, horizon: float = 1.0,
                   steps=(0.2, 0.1, 0.05, 0.025)) -> float:
    """Global convergence order at a fixed horizon vs the exact logistic."""
    exact = react_closed_form(FKPP(), u0, horizon)
    errors = []
    for dt in steps:
        u = u0
        for _ in range(round(horizon / dt)):
            u = integrate(FKPP(), u, dt)
        errors.append(abs(u - exact))
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])


def rk4_reaction(model, u0: float, t_total: float, h: float = 1e-4) -> float:
    """Independent oracle: classic RK4 on du/dt = r(u) with a fine step."""
    steps = max(1, int(np.ceil(t_total / h)))
    h = t_total / steps
    u = float(u0)
    for _ in range(steps):
        k1 = float(rate(model, u))
        k2 = float(rate(model, u + 0.5 * h * k1))
        k3 = float(rate(model, u + 0.5 * h * k2))
        k4 = float(rate(model, u + h * k3))
        u += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    return u


class TestRate:
    def test_fkpp_fixed_points(self):
        assert rate(FKPP(), 0.0) == 0.0
        assert rate(FKPP(), 1.0) == 0.0

    def test_cubic_value(self):
        assert rate(Cubic(), 0.5) == pytest.approx(0.125, abs=1e-15)

    def test_arrhenius_endpoints(self):
        model = Arrhenius(0.5)
        assert rate(model, 1.0) == 0.0
        assert rate(model, 0.0) == 0.0  # continuous limit of exp(-E/u)
        assert rate(model, -0.3) == 0.0  # extended by zero below the domain

    def test_polynomial_matches_horner(self):
        model = Polynomial((1.0, -2.0, 0.5))
        u = 0.7
        assert rate(model, u) == pytest.approx(1.0 - 2.0 * u + 0.5 * u * u, rel=1e-14)

    def test_arrhenius_requires_positive_energy(self):
        with pytest.raises(ValueError):
            Arrhenius(0.0)


class TestRateDerivative:
    def test_fkpp_endpoint_slopes(self):
        assert rate_derivative(FKPP(), 0.0) == 1.0
        assert rate_derivative(FKPP(), 1.0) == -1.0

    def test_cubic_at_half(self):
        # d/du [u^2 - u^3] = 2u - 3u^2 = 0.25 at u = 0.5
        assert rate_derivative(Cubic(), 0.5) == pytest.approx(0.25, abs=1e-15)

    @pytest.mark.parametrize("model", ALL_MODELS)
    def test_matches_central_difference(self, model):
        h = 1e-6
        for u in np.linspace(0.01, 1.0, 25):
            fd = (rate(model, u + h) - rate(model, u - h)) / (2 * h)
            assert rate_derivative(model, u) == pytest.approx(fd, rel=1e-6, abs=1e-9)


class TestClosedForm:
    def test_fkpp_fixed_points(self):
        assert react_closed_form(FKPP(), 1.0, 2.0) == pytest.approx(1.0, abs=1e-15)
        assert react_closed_form(FKPP(), 0.0, 2.0) == 0.0

    def test_fkpp_against_rk4(self):
        # frozen oracle value: RK4 on du/dt = u(1-u), u0 = 0.5 over dt = 0.5
        got = react_closed_form(FKPP(), 0.5, 0.5)
        assert got == pytest.approx(0.6224593312018546, abs=1e-12)
        assert got == pytest.approx(rk4_reaction(FKPP(), 0.5, 0.5), abs=1e-9)

    def test_linear_exponential(self):
        # 0.3 * exp(0.5)
        assert react_closed_form(Linear(1.0), 0.3, 0.5) == pytest.approx(
            0.4946163812100385, rel=1e-12
        )

    def test_negative_u_star_rejected_when_denominator_flips(self):
        with pytest.raises(ReactionError):
            react_closed_form(FKPP(), -2.0, 3.0)

    def test_no_closed_form_for_cubic(self):
        with pytest.raises(ReactionError):
            react_closed_form(Cubic(), 0.5, 0.1)

    def test_monotone_in_u_star(self):
        u = np.linspace(0.0, 1.0, 200)
        out = react_closed_form(FKPP(), u, 0.5)
        assert np.all(np.diff(out) > 0)


class TestBackwardEuler:
    def test_fkpp_fixed_point(self):
        assert react_backward_euler(FKPP(), 1.0, 0.7) == pytest.approx(1.0, abs=1e-12)

    def test_fkpp_quadratic_oracle(self):
        # u - 0.5 = 0.1 u(1-u)  =>  0.1 u^2 + 0.9 u - 0.5 = 0, positive root
        root = (-0.9 + np.sqrt(0.81 + 4 * 0.1 * 0.5)) / (2 * 0.1)
        got = react_backward_euler(FKPP(), 0.5, 0.1)
        assert got == pytest.approx(root, abs=1e-12)
        assert got == pytest.approx(0.5249378105604451, abs=1e-12)

    def test_cubic_fixed_point_at_zero(self):
        assert react_backward_euler(Cubic(), 0.0, 0.9) == 0.0

    def test_nonconvergence_carries_state(self):
        with pytest.raises(ReactionError) as err:
            react_backward_euler(FKPP(), 0.5, 0.5, tol=1e-12, max_iter=1)
        assert err.value.residual is not None

    def test_observed_order_one(self):
        # global error at T = 1 against the exact logistic solution
        order = observed_order(react_backward_euler)
        assert order == pytest.approx(1.0, abs=0.15)


class TestCrankNicolson:
    def test_zero_rate_is_identity(self):
        assert react_crank_nicolson(Linear(0.0), 0.42, 0.5) == pytest.approx(0.42, abs=1e-15)

    def test_fkpp_close_to_exact(self):
        exact = react_closed_form(FKPP(), 0.5, 0.1)
        assert exact == pytest.approx(0.5249791874789399, abs=1e-12)
        assert react_crank_nicolson(FKPP(), 0.5, 0.1) == pytest.approx(exact, abs=2e-5)

    def test_fkpp_fixed_point(self):
        assert react_crank_nicolson(FKPP(), 1.0, 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_observed_order_two(self):
        order = observed_order(react_crank_nicolson)
        assert order == pytest.approx(2.0, abs=0.2)


class TestRangePreservation:
    @pytest.mark.parametrize("model", [FKPP(), Cubic(), Arrhenius(0.5)])
    @pytest.mark.parametrize(
        "integrate",
        [react_backward_euler, react_crank_nicolson],
        ids=["backward_euler", "crank_nicolson"],
    )
    def test_unit_interval_maps_into_itself(self, model, integrate):
        for u0 in np.linspace(0.0, 1.0, 21):
            for dt in np.linspace(0.05, 1.0, 20):
                out = integrate(model, u0, dt)
                assert -1e-12 <= out <= 1.0 + 1e-12

    def test_closed_form_fkpp_preserves_unit_interval(self):
        u0 = np.linspace(0.0, 1.0, 21)
        for dt in np.linspace(0.05, 1.0, 20):
            out = react_closed_form(FKPP(), u0, dt)
            assert np.all(out >= 0.0) and np.all(out <= 1.0 + 1e-12)


class TestIntegrateField:
    def test_zero_field_stays_zero(self, grid_1d):
        field = make_field(grid_1d, np.zeros(150))
        out, mass = integrate_reaction_field(field, FKPP(), ClosedForm(), 0.5)
        assert np.all(out.values == 0.0) and mass == 0.0

    def test_uniform_one_is_fixed(self, grid_1d):
        field = make_field(grid_1d, np.ones(150))
        out, _ = integrate_reaction_field(field, FKPP(), ClosedForm(), 0.5)
        assert np.allclose(out.values, 1.0, atol=1e-14)

    def test_single_bin_example(self):
        grid = GridSpec(1, 0.4, 2)  # two bins of width 0.4; use one occupied
        values = np.array([0.5, 0.0])
        out, mass = integrate_reaction_field(make_field(grid, values), FKPP(),
                                             ClosedForm(), 0.5)
        assert out.values[0] == pytest.approx(0.6224593312018546, abs=1e-12)
        assert mass == pytest.approx(0.6224593312018546 * 0.4, rel=1e-12)

    def test_time_stamp_unchanged(self, grid_1d):
        field = make_field(grid_1d, np.ones(150), time=3.0)
        out, _ = integrate_reaction_field(field, FKPP(), ClosedForm(), 0.5)
        assert out.time == 3.0

    def test_closed_form_requires_compatible_kinetics(self, grid_1d):
        field = make_field(grid_1d, np.ones(150))
        with pytest.raises(ReactionError):
            integrate_reaction_field(field, Cubic(), ClosedForm(), 0.5)

    def test_solver_failure_reports_bin_index(self, grid_1d):
        field = make_field(grid_1d, np.full(150, 0.5))
        with pytest.raises(ReactionError) as err:
            integrate_reaction_field(field, FKPP(),
                                     BackwardEuler(tol=1e-16, max_iter=1), 0.5)
        assert err.value.bin_index is not None

    @pytest.mark.parametrize("scheme", [ClosedForm(), BackwardEuler(), CrankNicolson()])
    def test_bin_locality_commutes_with_permutation(self, grid_1d, rng, scheme):
        values = rng.random(150)
        perm = rng.permutation(150)
        field = make_field(grid_1d, values)
        out, _ = integrate_reaction_field(field, FKPP(), scheme, 0.5)
        out_perm, _ = integrate_reaction_field(make_field(grid_1d, values[perm]),
                                               FKPP(), scheme, 0.5)
        assert np.array_equal(out.values[perm], out_perm.values)
