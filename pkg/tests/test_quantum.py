import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from cqsd.quantum import (
    TOL,
    BellKind,
    MeasBasis,
    PauliOp,
    RandomSource,
    TwoQubitState,
    apply_pauli,
    basis_state,
    bell_measure,
    bell_overlaps,
    bell_state,
    classify_bell,
    derive_seed,
    factor_product,
    inner,
    measure_pair_in_basis,
    measure_single,
    product_state,
    singlet,
)

S = 1 / math.sqrt(2)


def amps_close(state, expected, tol=TOL):
    return all(abs(a - b) < tol for a, b in zip(state.amps, expected))


def as_state(vec):
    return TwoQubitState(tuple(complex(a) for a in vec))


unit_complex = st.tuples(
    st.floats(-1, 1, allow_nan=False), st.floats(-1, 1, allow_nan=False)
).map(lambda t: complex(*t))


@st.composite
def states(draw):
    amps = [draw(unit_complex) for _ in range(4)]
    norm = math.sqrt(sum(abs(a) ** 2 for a in amps))
    if norm < 1e-3:
        amps, norm = [1, 0, 0, 0], 1.0
    return TwoQubitState(tuple(complex(a) / norm for a in amps))


class TestBellStates:
    def test_singlet_amplitudes(self):
        assert amps_close(bell_state(BellKind.PSI_MINUS), (0, S, -S, 0))

    def test_phi_plus_amplitudes(self):
        assert amps_close(bell_state(BellKind.PHI_PLUS), (S, 0, 0, S))

    @pytest.mark.parametrize("kind", list(BellKind))
    def test_normalized_and_match_oracle(self, kind):
        state = bell_state(kind)
        assert state.norm_squared() == pytest.approx(1.0, abs=TOL)
        assert np.allclose(state.amps, oracle.BELL[kind.label], atol=TOL)

    def test_ordering_and_labels(self):
        assert [int(k) for k in BellKind] == [0, 1, 2, 3]
        assert [k.label for k in BellKind] == ["Phi+", "Phi-", "Psi+", "Psi-"]
        assert BellKind.from_label("Psi-") is BellKind.PSI_MINUS
        with pytest.raises(ValueError):
            BellKind.from_label("Chi+")


class TestApplyPauli:
    def test_identity_leaves_singlet(self):
        assert amps_close(apply_pauli(singlet(), 0, PauliOp.U1_I), singlet().amps)

    def test_x_on_singlet(self):
        assert amps_close(apply_pauli(singlet(), 0, PauliOp.U2_X), (-S, 0, 0, S))

    def test_z_on_singlet(self):
        assert amps_close(apply_pauli(singlet(), 0, PauliOp.U3_Z), (0, S, S, 0))

    def test_zx_on_singlet(self):
        assert amps_close(apply_pauli(singlet(), 0, PauliOp.U4_ZX), (-S, 0, 0, -S))

    @pytest.mark.parametrize("op", list(PauliOp))
    @pytest.mark.parametrize("target", [0, 1])
    def test_matches_dense_oracle(self, op, target):
        rng = np.random.default_rng(7)
        for _ in range(20):
            vec = oracle.random_state(rng)
            got = apply_pauli(as_state(vec), target, op)
            want = oracle.apply(oracle.OPERATORS[op.gate], target, vec)
            assert np.allclose(got.amps, want, atol=TOL)

    def test_zx_is_z_after_x(self):
        state = as_state(oracle.random_state(np.random.default_rng(1)))
        via_parts = apply_pauli(apply_pauli(state, 0, PauliOp.U2_X), 0, PauliOp.U3_Z)
        assert amps_close(apply_pauli(state, 0, PauliOp.U4_ZX), via_parts.amps)

    def test_bad_target(self):
        with pytest.raises(ValueError):
            apply_pauli(singlet(), 2, PauliOp.U2_X)

    @given(states(), states(), st.sampled_from(list(PauliOp)), st.sampled_from([0, 1]))
    def test_unitarity(self, a, b, op, target):
        before = inner(a, b)
        after = inner(apply_pauli(a, target, op), apply_pauli(b, target, op))
        assert abs(before - after) < TOL
        assert apply_pauli(a, target, op).norm_squared() == pytest.approx(1.0, abs=TOL)

    def test_encoded_singlets_pairwise_orthogonal(self):
        encoded = [apply_pauli(singlet(), 0, op) for op in PauliOp]
        for i, left in enumerate(encoded):
            for j, right in enumerate(encoded):
                if i != j:
                    assert abs(inner(left, right)) < TOL


class TestMeasureSingle:
    def test_singlet_outcomes_are_fair(self):
        n = 4000
        ones = sum(measure_single(singlet(), 1, MeasBasis.Z, RandomSource(s))[0] for s in range(n))
        assert abs(ones / n - 0.5) <= 3 * math.sqrt(0.25 / n)

    def test_collapse_fixes_partner(self):
        rng = RandomSource(11)
        for _ in range(200):
            outcome, post = measure_single(singlet(), 1, MeasBasis.Z, rng)
            if outcome == 0:
                # qubit 0 is now |1> with certainty (up to global phase)
                assert abs(abs(inner(basis_state(1, 0), post)) - 1) < TOL
                assert measure_single(post, 0, MeasBasis.Z, rng)[0] == 1

    @pytest.mark.parametrize("basis", list(MeasBasis))
    @pytest.mark.parametrize("target", [0, 1])
    def test_post_state_matches_projector(self, basis, target):
        rng = RandomSource(3)
        vec = oracle.random_state(np.random.default_rng(5))
        expected = oracle.measure_single_distribution(vec, target, basis.value)
        for _ in range(50):
            outcome, post = measure_single(as_state(vec), target, basis, rng)
            want = expected[outcome][1]
            assert abs(abs(np.vdot(want, post.amps)) - 1) < TOL
            assert post.norm_squared() == pytest.approx(1.0, abs=TOL)

    @pytest.mark.parametrize("basis", list(MeasBasis))
    def test_repeat_measurement_is_stable(self, basis):
        rng = RandomSource(9)
        vec = oracle.random_state(np.random.default_rng(2))
        for _ in range(100):
            first, post = measure_single(as_state(vec), 0, basis, rng)
            second, _ = measure_single(post, 0, basis, rng)
            assert first == second

    def test_eigenstate_is_deterministic(self):
        rng = RandomSource(0)
        assert all(measure_single(basis_state(0, 0), 0, MeasBasis.Z, rng)[0] == 0 for _ in range(500))

    def test_born_frequencies(self):
        vec = oracle.random_state(np.random.default_rng(17))
        p0 = oracle.measure_single_distribution(vec, 0, "X")[0][0]
        rng = RandomSource(4)
        n = 20000
        zeros = sum(1 - measure_single(as_state(vec), 0, MeasBasis.X, rng)[0] for _ in range(n))
        assert abs(zeros / n - p0) <= 3 * math.sqrt(p0 * (1 - p0) / n)


class TestMeasurePair:
    @pytest.mark.parametrize("basis", list(MeasBasis))
    def test_singlet_anticorrelated(self, basis):
        rng = RandomSource(21)
        outcomes = [measure_pair_in_basis(singlet(), basis, rng) for _ in range(2000)]
        assert all(b0 != b1 for b0, b1 in outcomes)
        assert 0 < sum(b0 for b0, _ in outcomes) < len(outcomes)

    def test_product_eigenstate(self):
        rng = RandomSource(2)
        assert {measure_pair_in_basis(basis_state(0, 0), MeasBasis.Z, rng) for _ in range(200)} == {(0, 0)}

    @pytest.mark.parametrize("basis", list(MeasBasis))
    def test_distribution_matches_oracle(self, basis):
        vec = oracle.random_state(np.random.default_rng(8))
        dist = oracle.pair_distribution(vec, basis.value)
        rng = RandomSource(6)
        n = 20000
        counts = {k: 0 for k in dist}
        for _ in range(n):
            counts[measure_pair_in_basis(as_state(vec), basis, rng)] += 1
        for k, p in dist.items():
            assert abs(counts[k] / n - p) <= 3 * math.sqrt(p * (1 - p) / n) + 1e-12


class TestBellMeasure:
    def test_basis_state_is_certain(self):
        rng = RandomSource(1)
        assert all(bell_measure(singlet(), rng) is BellKind.PSI_MINUS for _ in range(200))

    def test_global_phase_ignored(self):
        rng = RandomSource(1)
        state = apply_pauli(singlet(), 0, PauliOp.U2_X)  # -Phi-
        assert all(bell_measure(state, rng) is BellKind.PHI_MINUS for _ in range(200))

    def test_zero_zero_splits_between_phis(self):
        rng = RandomSource(12)
        n = 4000
        got = [bell_measure(basis_state(0, 0), rng) for _ in range(n)]
        assert set(got) == {BellKind.PHI_PLUS, BellKind.PHI_MINUS}
        frac = got.count(BellKind.PHI_PLUS) / n
        assert abs(frac - 0.5) <= 3 * math.sqrt(0.25 / n)

    def test_overlaps_match_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            vec = oracle.random_state(rng)
            assert np.allclose(bell_overlaps(as_state(vec)), oracle.bell_probabilities(vec), atol=TOL)

    @pytest.mark.parametrize("case", range(4))
    def test_oracle_equivalence_on_product_states(self, case):
        vec = oracle.random_product_state(np.random.default_rng(100 + case))
        probs = oracle.bell_probabilities(vec)
        n = 1000
        counts = np.zeros(4)
        for seed in range(n):
            counts[bell_measure(as_state(vec), RandomSource(seed))] += 1
        se = np.sqrt(probs * (1 - probs) / n)
        assert np.all(np.abs(counts / n - probs) <= 3 * se + 1e-12)

    def test_classify_rejects_non_bell(self):
        with pytest.raises(ValueError):
            classify_bell(basis_state(0, 1))


class TestStateHelpers:
    def test_from_amplitudes_validates(self):
        assert TwoQubitState.from_amplitudes([0, S, -S, 0]).norm_squared() == pytest.approx(1)
        with pytest.raises(ValueError, match="normalized"):
            TwoQubitState.from_amplitudes([1, 1, 0, 0])
        with pytest.raises(ValueError, match="finite"):
            TwoQubitState.from_amplitudes([float("nan"), 0, 0, 0])
        with pytest.raises(ValueError):
            TwoQubitState.from_amplitudes([1, 0, 0])

    def test_factor_product_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            vec = oracle.random_product_state(rng)
            q0, q1 = factor_product(as_state(vec))
            assert np.allclose(product_state(q0, q1).amps, vec, atol=TOL)

    def test_factor_product_rejects_entangled(self):
        with pytest.raises(ValueError, match="entangled"):
            factor_product(singlet())


class TestRandomSource:
    def test_same_seed_same_sequence(self):
        a, b = RandomSource(2**63 + 5), RandomSource(2**63 + 5)
        assert [a.random() for _ in range(50)] == [b.random() for _ in range(50)]

    def test_measurement_sequences_deterministic(self):
        def run(seed):
            rng = RandomSource(seed)
            return [measure_pair_in_basis(basis_state(0, 0), MeasBasis.X, rng) for _ in range(100)]

        assert run(99) == run(99)
        assert run(99) != run(100)

    def test_seed_range(self):
        with pytest.raises(ValueError):
            RandomSource(-1)
        with pytest.raises(ValueError):
            RandomSource(2**64)

    def test_spawn_independent_of_parent_use(self):
        a, b = RandomSource(5), RandomSource(5)
        a.random()
        assert a.spawn("x").random() == b.spawn("x").random()
        assert derive_seed(5, "x") != derive_seed(5, "y")
