import math

import numpy as np
import pytest

from hinfkit import (
    DescriptorPlant,
    Gain,
    InvalidInputError,
    RationalPlant,
    StateSpace,
    UnstableSystemError,
    buffer_law,
    certify_optimality,
    close_loop,
    compile_buffer,
    descriptor_gain,
    droop_gain,
    droop_plant,
    eval_closed_rational,
    hinf_norm_grid,
    hinf_norm_ss,
    lower_bound,
    pencil_stability,
    pseudoinverse,
    rational_stability,
    sparsity_pattern,
    spectral_norm,
    symmetric_commuting_check,
    weighted_lower_bound,
    zero_peak_inequality,
)
from conftest import asym_chain, random_buffer

SQRT_HALF = 2.0**-0.5
ASYM_NORM_AT_ONE = math.sqrt(1.0 + math.sqrt(2.0) / 2.0)  # ||G^{-1}||^{1/2}, G = [[3,-1],[-1,1]]


class TestPencilStability:
    def test_lag_loop(self, lag_plant):
        res = pencil_stability(lag_plant, Gain([[-1.0]]))
        assert res.stable and res.abscissa == pytest.approx(-2.0)

    def test_asym_chain(self):
        res = pencil_stability(asym_chain(1.0), Gain([[-1.0, 0.0]]))
        assert res.stable and res.abscissa == pytest.approx(-1.0)

    def test_small_rate_still_stable(self):
        a = 0.01
        p = asym_chain(a)
        res = pencil_stability(p, descriptor_gain(p))
        # closed-loop eigenvalues are -a - 1/a and -1
        assert res.stable and res.abscissa == pytest.approx(-1.0)

    def test_zero_rate_rejected_upstream(self):
        from hinfkit import SingularMatrixError

        with pytest.raises(SingularMatrixError):
            asym_chain(0.0)


class TestHinfNormStateSpace:
    def test_lag_loop(self, lag_plant):
        norm, peak = hinf_norm_ss(close_loop(lag_plant, Gain([[-1.0]])))
        assert norm == pytest.approx(SQRT_HALF, abs=1e-8)
        assert peak == 0.0

    def test_first_order_unit(self):
        ss = StateSpace([[-1.0]], [[1.0]], [[1.0]], [[0.0]])
        norm, peak = hinf_norm_ss(ss)
        assert norm == pytest.approx(1.0, rel=1e-8)
        assert peak == 0.0

    def test_asym_chain_norm(self):
        p = asym_chain(1.0)
        norm, peak = hinf_norm_ss(close_loop(p, descriptor_gain(p)))
        assert norm == pytest.approx(ASYM_NORM_AT_ONE, rel=1e-6)
        assert peak == 0.0

    def test_resonant_peak_found(self):
        # [0, w0^2] row of a lightly damped oscillator peaks near w0
        w0, zeta = 3.0, 0.05
        ss = StateSpace(
            [[0.0, 1.0], [-w0 * w0, -2 * zeta * w0]], [[0.0], [1.0]], [[1.0, 0.0]], [[0.0]]
        )
        norm, peak = hinf_norm_ss(ss)
        expected_peak = w0 * math.sqrt(1 - 2 * zeta**2)
        expected_norm = 1.0 / (w0 * w0 * 2 * zeta * math.sqrt(1 - zeta**2))
        assert norm == pytest.approx(expected_norm, rel=1e-7)
        assert peak == pytest.approx(expected_peak, abs=1e-4)

    def test_unstable_rejected(self):
        with pytest.raises(UnstableSystemError):
            hinf_norm_ss(StateSpace([[1.0]], [[1.0]], [[1.0]], [[0.0]]))

    def test_feedthrough_rejected(self):
        with pytest.raises(InvalidInputError):
            hinf_norm_ss(StateSpace([[-1.0]], [[1.0]], [[1.0]], [[1.0]]))


class TestHinfNormGrid:
    def test_double_pole_norm(self, double_pole_plant):
        norm, peak = hinf_norm_grid(double_pole_plant, Gain([[-0.25]]))
        assert norm == pytest.approx(17.0**-0.5, rel=1e-6)
        assert peak == 0.0

    def test_droop_peak_location(self):
        norm, peak = hinf_norm_grid(droop_plant(2.0, 0.5), droop_gain(2.0, 0.5))
        assert abs(peak - 2.0) <= 1e-4

    def test_matches_state_space_route(self, lag_plant):
        g = Gain([[-1.0]])
        n_grid, _ = hinf_norm_grid(lag_plant.to_rational(), g)
        n_ss, _ = hinf_norm_ss(close_loop(lag_plant, g))
        assert n_grid == pytest.approx(n_ss, rel=1e-6)


class TestLowerBound:
    def test_lag(self, lag_plant):
        value, omega = lower_bound(lag_plant.to_rational())
        assert value == pytest.approx(SQRT_HALF, rel=1e-9)
        assert omega == 0.0

    def test_double_pole_matches_dense_scan(self, double_pole_plant):
        value, omega = lower_bound(double_pole_plant)
        assert value == pytest.approx(17.0**-0.5, rel=1e-9)
        assert omega == 0.0
        # independent dense-grid oracle
        dense = max(
            1.0 / math.sqrt(abs(complex((w * 1j + 2) ** 2)) ** 2 + abs(1j * w + 1) ** 2)
            for w in np.linspace(0, 100, 20001)
        )
        assert value >= dense - 1e-12

    def test_droop_argmax(self):
        value, omega = lower_bound(droop_plant(2.0, 0.5))
        assert omega == pytest.approx(2.0, abs=1e-4)

    def test_weighted_reduces_to_plain(self, double_pole_plant):
        plain = lower_bound(double_pole_plant)
        weighted = weighted_lower_bound(double_pole_plant, [[1.0]])
        assert weighted.value == pytest.approx(plain.value, rel=1e-12)

    def test_weighted_scalar_value(self, lag_plant):
        res = weighted_lower_bound(lag_plant.to_rational(), [[2.0]])
        assert res.value == pytest.approx(2.0 / math.sqrt(5.0), rel=1e-9)


def test_pseudoinverse_route_identity():
    # ||[M -N]^+|| equals ||(M M^* + N N^*)^{-1}||^{1/2} at any frequency
    rng = np.random.default_rng(79)
    A = rng.standard_normal((3, 3)) - 4 * np.eye(3)
    B = rng.standard_normal((3, 2))
    p = DescriptorPlant(np.eye(3), A, B).to_rational()
    for w in rng.uniform(0.0, 50.0, 20):
        Mw, Nw = p.eval_M(w), p.eval_N(w)
        stacked = np.hstack([Mw, -Nw])
        lhs = spectral_norm(pseudoinverse(stacked))
        S = Mw @ Mw.conj().T + Nw @ Nw.conj().T
        rhs = spectral_norm(np.linalg.inv(S)) ** 0.5
        assert lhs == pytest.approx(rhs, abs=1e-9)


class TestCertificates:
    def test_lag_optimal(self, lag_plant):
        cert = certify_optimality(lag_plant.to_rational(), descriptor_gain(lag_plant))
        assert cert.verdict == "optimal"
        assert cert.hinf_norm == pytest.approx(SQRT_HALF, abs=1e-8)
        assert cert.lower_bound == pytest.approx(SQRT_HALF, rel=1e-9)
        assert cert.gap == pytest.approx(0.0, abs=1e-7)
        assert cert.peak_frequency == 0.0

    def test_open_loop_suboptimal(self, lag_plant):
        cert = certify_optimality(lag_plant.to_rational(), Gain(np.zeros((1, 1))))
        assert cert.verdict == "stable-but-suboptimal"
        assert cert.hinf_norm == pytest.approx(1.0, rel=1e-6)

    def test_destabilizing_gain_flagged(self, double_pole_plant):
        cert = certify_optimality(double_pole_plant, Gain([[5.0]]))
        assert cert.verdict == "unstable"
        assert not cert.stable
        assert math.isinf(cert.hinf_norm)

    def test_gap_sign_invariant(self, three_state_demo):
        cert = certify_optimality(three_state_demo.to_rational(), descriptor_gain(three_state_demo))
        assert cert.gap >= -cert.tolerances["norm_rtol"]

    def test_rational_route_used_without_descriptor(self, double_pole_plant):
        cert = certify_optimality(double_pole_plant, Gain([[-0.25]]))
        assert cert.details["method"] == "grid"
        assert cert.verdict == "optimal"


class TestRationalStability:
    def test_droop_loop_stable(self):
        res = rational_stability(droop_plant(2.0, 0.5), droop_gain(2.0, 0.5))
        assert res.stable

    def test_unstable_root_found(self, double_pole_plant):
        res = rational_stability(double_pole_plant, Gain([[5.0]]))
        assert not res.stable
        # det numerator is s^2 - s - 1, whose positive root is (1 + sqrt(5)) / 2
        assert res.abscissa == pytest.approx((1.0 + math.sqrt(5.0)) / 2.0, rel=1e-9)

    def test_marginal_root_counts_as_unstable(self):
        p = RationalPlant([[[0.0, 1.0]]], [[[1.0]]])  # M = s, N = 1
        res = rational_stability(p, Gain([[0.0]]))
        assert not res.stable


class TestZeroPeakInequality:
    @pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 2.0, 10.0])
    def test_asym_chain_family_holds(self, a):
        assert zero_peak_inequality(asym_chain(a)).holds

    def test_symmetric_plant_holds(self, three_state_demo):
        res = zero_peak_inequality(three_state_demo)
        assert res.holds and res.tail_rule == "full"

    def test_rotational_weakly_actuated_fails(self):
        # lightly damped rotation with weak inputs peaks near the resonance,
        # confirmed against a dense-grid scan below
        p = DescriptorPlant(np.eye(2), [[-0.1, 5.0], [-5.0, -0.1]], 0.01 * np.eye(2))
        res = zero_peak_inequality(p)
        assert not res.holds
        assert res.omega_at_min == pytest.approx(5.0, abs=0.01)

        F = p.E @ p.A.T
        G = p.A @ p.A.T + p.B @ p.B.T
        thresh = np.linalg.eigvalsh(G)[0]
        FGF = F @ np.linalg.solve(G, F.T)
        skew = F.T - F
        dense_min = min(
            np.linalg.eigvalsh(w * w * FGF + 1j * w * skew + G - thresh * np.eye(2))[0]
            for w in np.concatenate([[0.0], np.logspace(-4, 4, 20000)])
        )
        assert res.min_eigenvalue == pytest.approx(dense_min, rel=1e-3)

    def test_singular_descriptor_uses_subspace_tail(self):
        p = DescriptorPlant(np.diag([1.0, 0.0]), -np.eye(2), np.eye(2))
        res = zero_peak_inequality(p)
        assert res.tail_rule == "subspace"
        assert res.checked_up_to >= 1e6


class TestSymmetricCommuting:
    def test_buffer_plant_passes(self, line_buffer):
        assert symmetric_commuting_check(compile_buffer(line_buffer)).holds

    def test_three_state_demo_passes(self, three_state_demo):
        assert symmetric_commuting_check(three_state_demo).holds

    def test_asym_chain_fails_symmetry(self):
        report = symmetric_commuting_check(asym_chain(1.0))
        assert not report.symmetric_A and not report.holds

    def test_positive_definite_A_fails(self):
        p = DescriptorPlant(np.eye(1), [[1.0]], [[1.0]])
        assert not symmetric_commuting_check(p).negative_definite_A


class TestSparsityPattern:
    def test_three_state_closed_form(self, three_state_demo):
        res = sparsity_pattern(descriptor_gain(three_state_demo))
        assert res.zeros == 4 and res.nonzeros == 5

    def test_published_dense_gain(self):
        printed = Gain(
            [[0.93, -0.11, 0.00], [-0.05, -0.17, -0.01], [0.04, 0.16, -0.26]]
        )
        res = sparsity_pattern(printed)
        assert res.zeros == 1 and res.nonzeros == 8

    def test_zero_matrix(self):
        res = sparsity_pattern(Gain(np.zeros((2, 3))))
        assert res.zeros == 6 and res.nonzeros == 0


def test_symmetric_plants_certify_with_norm_formula():
    # symmetric commuting plants: certificate agrees with ||(A A^T + B B^T)^{-1}||^{1/2}
    rng = np.random.default_rng(83)
    for _ in range(5):
        n = int(rng.integers(2, 6))
        X = rng.standard_normal((n, n))
        A = -(X @ X.T + 0.5 * np.eye(n))
        B = rng.standard_normal((n, int(rng.integers(1, 4))))
        p = DescriptorPlant(np.eye(n), A, B)
        assert symmetric_commuting_check(p).holds
        cert = certify_optimality(p.to_rational(), descriptor_gain(p))
        assert cert.verdict == "optimal"
        G = A @ A.T + B @ B.T
        formula = 1.0 / math.sqrt(np.linalg.eigvalsh(G)[0])
        assert cert.hinf_norm == pytest.approx(formula, rel=1e-6)


def test_lower_bound_caps_any_stabilizing_gain():
    rng = np.random.default_rng(89)
    p = asym_chain(1.0)
    rp = p.to_rational()
    bound = lower_bound(rp).value
    K_opt = descriptor_gain(p).K
    tried = 0
    while tried < 25:
        K = K_opt + 0.3 * rng.standard_normal(K_opt.shape)
        if not pencil_stability(p, Gain(K)).stable:
            continue
        norm, _ = hinf_norm_ss(close_loop(p, Gain(K)))
        assert norm >= bound - 1e-9
        tried += 1


def test_buffer_closed_loop_is_metzler():
    rng = np.random.default_rng(97)
    for n in [4, 9, 16]:
        net = random_buffer(rng, n)
        plant = compile_buffer(net)
        Acl = plant.A + plant.B @ buffer_law(net).K
        off = Acl - np.diag(np.diag(Acl))
        assert off.min() >= 0.0


def test_grid_norm_even_in_frequency(lag_plant):
    # responses of real-data plants are even in omega; spot-check a few points
    rp = lag_plant.to_rational()
    g = Gain([[-1.0]])
    for w in [0.1, 1.0, 7.3]:
        plus = spectral_norm(eval_closed_rational(rp, g, w))
        minus = spectral_norm(eval_closed_rational(rp, g, -w))
        assert plus == pytest.approx(minus, rel=1e-12)
