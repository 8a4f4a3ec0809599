import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pilotkit import (
    CfMmimoSystem,
    GenerationConfig,
    InfeasibleAssignmentError,
    PilotAssignment,
    compute_gamma_default,
    generate_system,
    system_throughput,
    uplink_rate,
    validate_system,
)
from pilotkit.fileio import format_instance
from pilotkit.solvers import random_feasible
from pilotkit.system_model import exact_beta_squares

from conftest import make_system, small_random_system

# Hand-derived rate of the symmetric two-user system sharing a pilot:
# SINR = (1/4) / (1/4 + 1 + 1/2) = 1/7, prelog (1 - 2/10)/2 = 0.4.
RATE_EXAMPLE = 0.4 * math.log2(8 / 7)


class TestPilotAssignment:
    def test_surjective_ok(self):
        a = PilotAssignment((0, 1, 0), 2)
        assert a.n_users == 3 and a.n_pilots == 2

    def test_missing_pilot_rejected(self):
        with pytest.raises(InfeasibleAssignmentError, match="not surjective"):
            PilotAssignment((0, 0, 0), 2)

    def test_out_of_range_rejected(self):
        with pytest.raises(InfeasibleAssignmentError, match="out of range"):
            PilotAssignment((0, 2), 2)

    def test_relabeled(self):
        a = PilotAssignment((0, 1, 1), 2)
        assert a.relabeled([1, 0]).pilot_of == (1, 0, 0)


class TestValidateSystem:
    def test_ok(self):
        s = make_system([[1.0, 1.0], [1.0, 1.0]], [(0,), (1,)], tau=2)
        assert validate_system(s).ok

    def test_more_pilots_than_users(self):
        s = make_system([[1.0, 1.0], [1.0, 1.0]], [(0,), (1,)], tau=3)
        res = validate_system(s)
        assert not res.ok
        assert any("no surjective assignment" in v for v in res.violations)

    def test_zero_beta_on_serving_link(self):
        s = make_system([[0.0, 1.0], [1.0, 1.0]], [(0,), (1,)], tau=2)
        res = validate_system(s)
        assert not res.ok
        assert any("zero coefficient on serving link" in v for v in res.violations)
        assert any("[0, 0]" in v for v in res.violations)  # locates the entry

    def test_empty_serving_set(self):
        s = make_system([[1.0, 1.0], [1.0, 1.0]], [(0,), ()], tau=2)
        res = validate_system(s)
        assert any("empty" in v for v in res.violations)

    def test_tau_c_too_short(self):
        s = make_system([[1.0], [1.0]], [(0,), (0,)], tau=2, tau_c=2)
        res = validate_system(s)
        assert any("tau_c" in v for v in res.violations)

    def test_eta_out_of_range(self):
        s = make_system([[1.0], [1.0]], [(0,), (0,)], tau=1, eta=[0.5, 1.5])
        res = validate_system(s)
        assert any("eta" in v for v in res.violations)

    def test_shape_mismatch(self):
        s = CfMmimoSystem(
            m_aps=3,
            k_users=2,
            tau_pilots=1,
            beta=np.ones((2, 2)),
            serving_sets=((0,), (1,)),
            gamma=np.ones((2, 2)),
            eta=np.ones(2),
            rho_u=1.0,
            tau_c=10,
        )
        res = validate_system(s)
        assert not res.ok
        assert any("beta shape" in v for v in res.violations)

    def test_never_raises_on_garbage(self):
        s = CfMmimoSystem(
            m_aps=0,
            k_users=0,
            tau_pilots=0,
            beta=np.zeros((0, 0)),
            serving_sets=(),
            gamma=np.zeros((0, 0)),
            eta=np.zeros(0),
            rho_u=-1.0,
            tau_c=0,
        )
        res = validate_system(s)
        assert not res.ok and len(res.violations) >= 3


class TestGenerateSystem:
    def test_output_passes_validation(self):
        s = generate_system(GenerationConfig(seed=42), 16, 4, 2)
        assert validate_system(s).ok

    def test_deterministic_byte_for_byte(self):
        cfg = GenerationConfig(seed=7, ap_selection_rule="top:3")
        s1 = generate_system(cfg, 12, 5, 2)
        s2 = generate_system(cfg, 12, 5, 2)
        assert format_instance(s1) == format_instance(s2)

    def test_different_seeds_differ(self):
        s1 = generate_system(GenerationConfig(seed=1), 12, 5, 2)
        s2 = generate_system(GenerationConfig(seed=2), 12, 5, 2)
        assert format_instance(s1) != format_instance(s2)

    def test_top_one_rule(self):
        s = generate_system(GenerationConfig(seed=3, ap_selection_rule="top:1"), 10, 4, 2)
        assert all(len(a) == 1 for a in s.serving_sets)

    def test_energy_rule_captures_fraction(self):
        theta = 0.9
        s = generate_system(
            GenerationConfig(seed=4, ap_selection_rule=f"energy:{theta}"), 20, 5, 2
        )
        for k, aps in enumerate(s.serving_sets):
            captured = s.beta[k, list(aps)].sum()
            assert captured >= theta * s.beta[k].sum() * (1 - 1e-12)

    def test_pilots_exceed_users_rejected(self):
        with pytest.raises(ValueError, match="exceeds user count"):
            generate_system(GenerationConfig(seed=0), 8, 4, 5)

    @pytest.mark.parametrize("rule", ["best:3", "top:0", "top:x", "energy:0", "energy:1.5", "energy"])
    def test_bad_rule_rejected(self, rule):
        with pytest.raises(ValueError, match="AP selection rule"):
            generate_system(GenerationConfig(seed=0, ap_selection_rule=rule), 8, 4, 2)

    def test_bad_area_rejected(self):
        with pytest.raises(ValueError, match="area"):
            generate_system(GenerationConfig(seed=0, area_side_m=0.0), 8, 4, 2)

    def test_more_users_than_aps_warns(self):
        with pytest.warns(UserWarning, match="atypical"):
            generate_system(GenerationConfig(seed=0), 3, 5, 2)

    def test_eta_policies(self):
        full = generate_system(GenerationConfig(seed=5, eta_policy="full"), 8, 4, 2)
        uni = generate_system(GenerationConfig(seed=5, eta_policy="uniform"), 8, 4, 2)
        assert np.all(full.eta == 1.0)
        assert np.allclose(uni.eta, 0.25)

    def test_arrays_are_read_only(self):
        s = generate_system(GenerationConfig(seed=6), 8, 4, 2)
        with pytest.raises(ValueError):
            s.beta[0, 0] = 2.0


class TestGammaDefault:
    def test_half_at_unit_product(self):
        # beta = 1 and tau * rho_p = 1 puts the estimate quality at 1/2
        s = make_system([[1.0]], [(0,)], tau=1)
        g = compute_gamma_default(s, rho_p=1.0, tau=1)
        assert g[0, 0] == pytest.approx(0.5, rel=1e-15)

    def test_zero_beta_gives_zero(self):
        s = make_system([[1.0, 0.0]], [(0,)], tau=1)
        g = compute_gamma_default(s, rho_p=2.0, tau=3)
        assert g[0, 1] == 0.0

    def test_saturates_to_beta(self):
        s = make_system([[1.0]], [(0,)], tau=1)
        g = compute_gamma_default(s, rho_p=1e12, tau=1)
        assert g[0, 0] == pytest.approx(1.0, rel=1e-9)

    def test_strictly_below_beta(self):
        s = small_random_system(seed=11)
        g = compute_gamma_default(s, rho_p=100.0, tau=2)
        mask = s.beta > 0
        assert np.all(g[mask] < s.beta[mask])
        assert np.all(g >= 0)

    def test_rejects_bad_parameters(self):
        s = make_system([[1.0]], [(0,)], tau=1)
        with pytest.raises(ValueError):
            compute_gamma_default(s, rho_p=0.0, tau=1)
        with pytest.raises(ValueError):
            compute_gamma_default(s, rho_p=1.0, tau=0)


class TestUplinkRate:
    def test_hand_derived_value(self, rate_example_system):
        a = PilotAssignment((0, 0, 1), 2)
        assert uplink_rate(rate_example_system, a, 0) == pytest.approx(
            RATE_EXAMPLE, rel=1e-12
        )
        assert uplink_rate(rate_example_system, a, 1) == pytest.approx(
            RATE_EXAMPLE, rel=1e-12
        )

    def test_contamination_free_matches_direct_formula(self, rate_example_system):
        # user 2 is alone on its pilot: coherent term vanishes
        s = rate_example_system
        a = PilotAssignment((0, 0, 1), 2)
        gsum = 0.5
        num = gsum**2
        noncoherent = gsum * 1.0  # only user 2's own fading is nonzero on A(2)
        den = noncoherent + gsum
        expected = 0.4 * math.log2(1 + num / den)
        assert uplink_rate(s, a, 2) == pytest.approx(expected, rel=1e-12)

    def test_extra_co_pilot_user_strictly_decreases(self):
        beta = np.ones((3, 3))
        s = make_system(beta, [(0,), (1,), (2,)], tau=2)
        alone = PilotAssignment((0, 1, 1), 2)
        crowded = PilotAssignment((0, 0, 1), 2)
        assert uplink_rate(s, crowded, 0) < uplink_rate(s, alone, 0)

    def test_label_invariance(self, rate_example_system):
        s = rate_example_system
        a = PilotAssignment((0, 0, 1), 2)
        b = a.relabeled([1, 0])
        for k in range(3):
            assert uplink_rate(s, a, k) == pytest.approx(uplink_rate(s, b, k), rel=1e-15)

    def test_index_out_of_range(self, rate_example_system):
        a = PilotAssignment((0, 0, 1), 2)
        with pytest.raises(IndexError):
            uplink_rate(rate_example_system, a, 3)

    def test_mismatched_assignment_rejected(self, rate_example_system):
        a = PilotAssignment((0, 1), 2)
        with pytest.raises(InfeasibleAssignmentError):
            uplink_rate(rate_example_system, a, 0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), moved=st.integers(0, 4), target=st.integers(0, 4))
    def test_monotone_in_co_pilot_set(self, seed, moved, target):
        # moving another user onto the target's pilot never raises its rate
        s = small_random_system(seed % 50, m_aps=10, k_users=5, tau=2)
        a = random_feasible(s, seed)
        if moved == target or a.pilot_of[moved] == a.pilot_of[target]:
            return
        if sum(1 for p in a.pilot_of if p == a.pilot_of[moved]) < 2:
            return  # move would break surjectivity
        joined = list(a.pilot_of)
        joined[moved] = a.pilot_of[target]
        before = uplink_rate(s, a, target)
        after = uplink_rate(s, PilotAssignment(tuple(joined), 2), target)
        assert after <= before + 1e-12


class TestThroughput:
    def test_single_user_system(self):
        s = make_system([[1.0]], [(0,)], tau=1)
        a = PilotAssignment((0,), 1)
        assert system_throughput(s, a) == pytest.approx(uplink_rate(s, a, 0), rel=1e-15)

    def test_symmetric_pair_doubles(self, unit_pair_system):
        a = PilotAssignment((0, 0), 1)
        assert system_throughput(unit_pair_system, a) == pytest.approx(
            2 * uplink_rate(unit_pair_system, a, 0), rel=1e-12
        )

    def test_label_invariance(self):
        s = small_random_system(seed=21, k_users=6, tau=3)
        a = random_feasible(s, 5)
        b = a.relabeled([2, 0, 1])
        assert system_throughput(s, a) == pytest.approx(system_throughput(s, b), rel=1e-12)


class TestExactBetaSquares:
    def test_matches_float_bits(self):
        s = small_random_system(seed=31)
        bsq = exact_beta_squares(s)
        assert bsq[0][0] == Fraction(float(s.beta[0, 0])) ** 2

    def test_cached_per_system(self):
        s = small_random_system(seed=32)
        assert exact_beta_squares(s) is exact_beta_squares(s)
