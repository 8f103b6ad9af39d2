import itertools

import numpy as np
import pytest

import bfclab as B
from bfclab import boolfn as BF
from bfclab.bfc import check_error_bounds, proved_error_bounds, preimage_overlap
from bfclab.inner import decoder_statistics
from bfclab.setfamily import SetFamily, pack_subsets


@pytest.fixture(scope="module")
def identity_setup():
    ch = B.identity_channel(2)
    inner = B.build_identity_code(ch, 3)
    fam = B.build_family_greedy(8, 0.125, 0.45, 8, seed=5)
    funcs = [
        BF.make_id(3, [t for t in range(1, 4) if (i >> (3 - t)) & 1]) for i in range(8)
    ]
    return ch, inner, fam, funcs


@pytest.fixture(scope="module")
def bsc_setup():
    ch = B.bsc(0.05)
    inner = B.build_random_code(ch, 5, 8, seed=11)
    fam = B.build_family_greedy(8, 0.125, 0.45, 8, seed=1)
    funcs = [BF.make_rank(3, r) for r in range(8)]
    return ch, inner, fam, funcs


def test_assemble_identity_reduction(identity_setup):
    ch, inner, fam, funcs = identity_setup
    code = B.assemble_bfc(inner, fam, funcs)
    assert code.m == 3
    assert code.s_max == 1
    assert code.lambda_eff == 1.0  # singleton members, cap 0
    # each decoding set covers exactly the member of its own message
    for j in range(8):
        assert code.decoder_masks[j].sum() == 1


def test_assemble_guards(identity_setup):
    ch, inner, fam, funcs = identity_setup
    small = SetFamily(8, 1, 0, fam.members[:4])
    with pytest.raises(ValueError, match="size mismatch"):
        B.assemble_bfc(inner, small, funcs)
    wrong_arity = funcs[:4] + [BF.make_bit(2, 1)]
    with pytest.raises(ValueError, match="arity"):
        B.assemble_bfc(inner, fam, wrong_arity)
    other_ground = B.build_family_greedy(16, 0.125, 0.45, 8, seed=0)
    with pytest.raises(ValueError, match="ground"):
        B.assemble_bfc(inner, other_ground, funcs)


def test_identity_disjoint_family_gives_exact_zeros(identity_setup):
    ch, inner, fam, funcs = identity_setup
    code = B.assemble_bfc(inner, fam, funcs)
    rep = B.eval_errors(code, ch, "exact")
    assert rep.lambda1_max == 0.0
    assert rep.lambda2_max == 0.0


def test_bsc_fixture_within_proved_error_bounds(bsc_setup):
    ch, inner, fam, funcs = bsc_setup
    code = B.assemble_bfc(inner, fam, funcs)
    rep = B.eval_errors(code, ch, "exact")
    checks = check_error_bounds(code, rep, inner.delta)
    assert checks["lambda1_within_bound"]
    assert checks["lambda2_within_bound"]
    b1, b2 = proved_error_bounds(code, inner.delta)
    assert rep.lambda1_max <= b1 + 1e-12
    assert rep.lambda2_max <= b2 + 1e-12


def test_decoder_set_identity_against_bruteforce(bsc_setup):
    # membership via the decoder function equals brute-force membership in
    # the union of decoding regions of covered codewords
    ch, inner, fam, funcs = bsc_setup
    code = B.assemble_bfc(inner, fam, funcs)
    _, table = decoder_statistics(inner, ch)
    members = code.message_members()
    Y, n = ch.output_size, inner.n
    for j in (0, 3, 7):
        covered = set()
        for msg in funcs[j].preimage_of_one():
            covered.update(members[msg].tolist())
        for yi in range(Y**n):
            in_mask = bool(code.decoder_masks[j][table[yi]])
            in_union = int(table[yi]) in covered
            assert in_mask == in_union


def test_mc_estimates_near_exact(bsc_setup):
    ch, inner, fam, funcs = bsc_setup
    code = B.assemble_bfc(inner, fam, funcs)
    exact = B.eval_errors(code, ch, "exact")
    mc = B.eval_errors(code, ch, "monte_carlo", trials=100_000, seed=3)
    mask1 = ~np.isnan(exact.per_pair_lambda1)
    assert np.allclose(
        mc.per_pair_lambda1[mask1], exact.per_pair_lambda1[mask1], atol=0.01
    )
    # CP intervals bracket their own point estimates
    lo = mc.cp_lambda1[mask1][:, 0]
    hi = mc.cp_lambda1[mask1][:, 1]
    est = mc.per_pair_lambda1[mask1]
    assert np.all(lo <= est + 1e-15) and np.all(est <= hi + 1e-15)


def test_mc_reproducible_and_seed_sensitive(bsc_setup):
    ch, inner, fam, funcs = bsc_setup
    code = B.assemble_bfc(inner, fam, funcs)
    a = B.eval_errors(code, ch, "monte_carlo", trials=2000, seed=5)
    b = B.eval_errors(code, ch, "monte_carlo", trials=2000, seed=5)
    c = B.eval_errors(code, ch, "monte_carlo", trials=2000, seed=6)
    assert np.array_equal(
        np.nan_to_num(a.per_pair_lambda2, nan=-1),
        np.nan_to_num(b.per_pair_lambda2, nan=-1),
    )
    assert not np.array_equal(
        np.nan_to_num(a.per_pair_lambda2, nan=-1),
        np.nan_to_num(c.per_pair_lambda2, nan=-1),
    )


def test_complement_swaps_error_pair_exactly(bsc_setup):
    ch, inner, fam, funcs = bsc_setup
    code = B.assemble_bfc(inner, fam, funcs)
    rep = B.eval_errors(code, ch, "exact")
    crep = B.eval_errors(B.complement_code(code), ch, "exact")
    assert crep.lambda1_max == rep.lambda2_max
    assert crep.lambda2_max == rep.lambda1_max
    # per-pair matrices transpose roles bit-for-bit
    assert np.array_equal(
        np.nan_to_num(crep.per_pair_lambda1, nan=-1.0),
        np.nan_to_num(rep.per_pair_lambda2, nan=-1.0),
    )


def test_complement_involution_bit_exact(bsc_setup):
    ch, inner, fam, funcs = bsc_setup
    code = B.assemble_bfc(inner, fam, funcs)
    rep = B.eval_errors(code, ch, "exact")
    dd = B.eval_errors(B.complement_code(B.complement_code(code)), ch, "exact")
    assert dd.lambda1_max == rep.lambda1_max and dd.lambda2_max == rep.lambda2_max
    assert np.array_equal(
        np.nan_to_num(dd.per_pair_lambda1, nan=-1.0),
        np.nan_to_num(rep.per_pair_lambda1, nan=-1.0),
    )
    assert np.array_equal(
        np.nan_to_num(dd.per_pair_lambda2, nan=-1.0),
        np.nan_to_num(rep.per_pair_lambda2, nan=-1.0),
    )


def test_complement_flips_weights(bsc_setup):
    ch, inner, fam, funcs = bsc_setup
    code = B.assemble_bfc(inner, fam, funcs)
    comp = B.complement_code(code)
    for f, g in zip(code.functions, comp.functions):
        assert g.weight == 8 - f.weight


def test_not_applicable_flags_swap_under_complement(identity_setup):
    ch, inner, fam, _ = identity_setup
    const_false = BF.BooleanFunction(3, np.zeros(8, dtype=np.uint8))
    code = B.assemble_bfc(inner, fam, [const_false])
    rep = B.eval_errors(code, ch, "exact")
    # no message satisfies f(i)=1, so the false-negative side is vacuous
    assert not rep.lambda1_applicable
    assert rep.lambda1_max is None
    assert rep.lambda2_applicable
    comp = B.complement_code(code)
    crep = B.eval_errors(comp, ch, "exact")
    assert comp.functions[0].weight == 8
    assert not crep.lambda2_applicable
    assert crep.lambda1_applicable


# ---------------------------------------------------------------------------
# Identification-code conversion
# ---------------------------------------------------------------------------


def test_to_id_code_identity_scheme(identity_setup):
    ch, inner, fam, funcs = identity_setup
    code = B.assemble_bfc(inner, fam, funcs)
    idc = B.to_id_code(code)
    assert idc.alpha == 0.0
    assert idc.s == 1
    rep = B.eval_id_errors(idc, ch, "exact")
    assert rep.misid_max == 0.0
    assert rep.wrongid_max == 0.0
    assert rep.misid_within_guarantee and rep.wrongid_within_guarantee


def test_to_id_code_requires_constant_weight(identity_setup):
    ch, inner, fam, _ = identity_setup
    mixed = [BF.make_rank(3, 0), BF.make_rank(3, 1)]
    with pytest.raises(ValueError, match="equal weight"):
        B.to_id_code(B.assemble_bfc(inner, fam, mixed))
    zero = [BF.BooleanFunction(3, np.zeros(8, dtype=np.uint8))]
    with pytest.raises(ValueError, match=">= 1"):
        B.to_id_code(B.assemble_bfc(inner, fam, zero))


def test_overlap_half_fixture(identity_setup):
    ch, inner, fam, _ = identity_setup
    f_a = BF.BooleanFunction.from_indices(3, [0, 1])
    f_b = BF.BooleanFunction.from_indices(3, [1, 2])
    assert preimage_overlap([f_a, f_b]) == 0.5
    code = B.assemble_bfc(inner, fam, [f_a, f_b])
    idc = B.to_id_code(code)
    assert idc.alpha == 0.5
    rep = B.eval_id_errors(idc, ch, "exact")
    src = B.eval_errors(code, ch, "exact")
    assert rep.misid_max <= (src.lambda1_max or 0.0) + 1e-12
    # wrong identification hits exactly the shared preimage mass: 1/2
    assert rep.wrongid_max == pytest.approx(0.5, abs=1e-12)
    assert rep.wrongid_max <= idc.alpha + (src.lambda2_max or 0.0) + 1e-12


def test_requested_alpha_enforced(identity_setup):
    ch, inner, fam, _ = identity_setup
    f_a = BF.BooleanFunction.from_indices(3, [0, 1])
    f_b = BF.BooleanFunction.from_indices(3, [1, 2])
    code = B.assemble_bfc(inner, fam, [f_a, f_b])
    with pytest.raises(ValueError, match="exceeds requested"):
        B.to_id_code(code, alpha=0.25)
    idc = B.to_id_code(code, alpha=0.5)
    assert idc.alpha_requested == 0.5


def test_gilbert_derived_function_set(identity_setup):
    ch, inner, fam, _ = identity_setup
    cw = B.gilbert_build(8, 2, 0.5)
    funcs = [
        BF.function_from_weight_sequence(cw.member_bits(i), 3) for i in range(8)
    ]
    computed = preimage_overlap(funcs)
    assert computed <= 0.5 + 1e-12
    code = B.assemble_bfc(inner, fam, funcs)
    idc = B.to_id_code(code, alpha=0.5)
    assert idc.alpha <= 0.5
    rep = B.eval_id_errors(idc, ch, "exact")
    assert rep.misid_within_guarantee and rep.wrongid_within_guarantee


def test_id_mixture_weights_valid(bsc_setup):
    ch, inner, fam, _ = bsc_setup
    funcs = [BF.make_threshold_exact(3, b) for b in (1, 2)]  # both weight 3
    code = B.assemble_bfc(inner, fam, funcs)
    idc = B.to_id_code(code)
    sums = idc.weights.sum(axis=1)
    assert np.all(np.abs(sums - 1.0) < 1e-12)
    support = (idc.weights > 0).sum(axis=1)
    assert np.all(support <= idc.s * fam.member_size)


def test_id_errors_mc_against_exact(bsc_setup):
    ch, inner, fam, funcs = bsc_setup
    code = B.assemble_bfc(inner, fam, [BF.make_threshold_exact(3, 1), BF.make_threshold_exact(3, 2)])
    idc = B.to_id_code(code)
    exact = B.eval_id_errors(idc, ch, "exact")
    mc = B.eval_id_errors(idc, ch, "monte_carlo", trials=100_000, seed=9)
    assert abs(mc.misid_max - exact.misid_max) < 0.01
    assert abs(mc.wrongid_max - exact.wrongid_max) < 0.01


def test_conversion_error_algebra_on_bsc(bsc_setup):
    ch, inner, fam, _ = bsc_setup
    funcs = [BF.make_threshold_exact(3, b) for b in (1, 2)]
    code = B.assemble_bfc(inner, fam, funcs)
    src = B.eval_errors(code, ch, "exact")
    idc = B.to_id_code(code)
    rep = B.eval_id_errors(idc, ch, "exact")
    assert rep.misid_max <= src.lambda1_max + 1e-12
    assert rep.wrongid_max <= idc.alpha + src.lambda2_max + 1e-12
    assert rep.guarantee_misid == src.lambda1_max
    assert rep.guarantee_wrongid == pytest.approx(idc.alpha + src.lambda2_max)


def test_single_function_id_code(identity_setup):
    ch, inner, fam, funcs = identity_setup
    code = B.assemble_bfc(inner, fam, funcs[:1])
    idc = B.to_id_code(code)
    rep = B.eval_id_errors(idc, ch, "exact")
    assert rep.wrongid_max is None  # no distinct pair exists
    assert rep.misid_max == 0.0


def test_message_assignment_is_family_order(identity_setup):
    ch, inner, fam, funcs = identity_setup
    code = B.assemble_bfc(inner, fam, funcs)
    members = code.message_members()
    for i in range(8):
        assert np.array_equal(members[i], fam.member_indices(i))
