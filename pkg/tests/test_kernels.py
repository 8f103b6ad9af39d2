import numpy as np
import pytest

import bfclab as B
from bfclab import _kernels


requires_numba = pytest.mark.skipif(
    not _kernels._HAVE_NUMBA, reason="numba not importable"
)


@pytest.fixture
def both_backends():
    """Run the wrapped call under each available backend and return results."""
    start = _kernels.active_backend()

    def run(fn, *args, **kwargs):
        out = {}
        for backend in ("numpy", "numba") if _kernels._HAVE_NUMBA else ("numpy",):
            _kernels.set_backend(backend)
            out[backend] = fn(*args, **kwargs)
        return out

    yield run
    _kernels.set_backend(start)


def test_confusion_matrix_backends_agree(both_backends):
    ch = B.bsc(0.07)
    code = B.build_random_code(ch, 6, 8, seed=4)
    res = both_backends(
        _kernels.confusion_matrix, ch.transition, code.codewords, 2**6
    )
    if len(res) == 1:
        pytest.skip("single backend available")
    R_np, d_np = res["numpy"]
    R_nb, d_nb = res["numba"]
    assert np.array_equal(d_np, d_nb)  # decisions are integer-identical
    assert np.allclose(R_np, R_nb, atol=1e-14)
    assert np.all(np.abs(R_np.sum(axis=1) - 1.0) < 1e-12)


def test_decode_words_backends_identical(both_backends):
    ch = B.bec(0.3)
    code = B.build_random_code(ch, 5, 4, seed=1)
    rng = np.random.default_rng(0)
    y = rng.integers(0, 3, size=(5000, 5))
    res = both_backends(_kernels.decode_words, ch.transition, code.codewords, y)
    if len(res) == 1:
        pytest.skip("single backend available")
    assert np.array_equal(res["numpy"], res["numba"])


def test_decode_words_erasure_bucket():
    # an output word impossible under every codeword decodes to index M
    ch = B.identity_channel(2)
    cw = np.array([[0, 0], [1, 1]])
    y = np.array([[0, 1], [0, 0], [1, 0]])
    d = _kernels.decode_words(ch.transition, cw, y)
    assert d.tolist() == [2, 0, 2]


def test_greedy_select_backends_identical(both_backends):
    rng = np.random.default_rng(3)
    cands = (rng.random((500, 1)) * 2**24).astype(np.uint64)
    res = both_backends(_kernels.greedy_select, cands, 3, 100)
    if len(res) == 1:
        pytest.skip("single backend available")
    assert np.array_equal(res["numpy"], res["numba"])


def test_greedy_select_semantics():
    # candidates scanned in order; keep iff intersection with every keep <= cap
    bits = np.array([[0b0011], [0b0110], [0b0101], [0b1000]], dtype=np.uint64)
    kept = _kernels.greedy_select(bits, 0, 10)
    assert kept.tolist() == [0, 3]
    kept1 = _kernels.greedy_select(bits, 1, 10)
    assert kept1.tolist() == [0, 1, 2, 3]  # every pair here meets in <= 1 element
    kept_t = _kernels.greedy_select(bits, 1, 2)
    assert kept_t.tolist() == [0, 1]
    tight = np.array([[0b0111], [0b0110]], dtype=np.uint64)
    assert _kernels.greedy_select(tight, 1, 10).tolist() == [0]


def test_pairwise_intersections_small():
    bits = np.array([[0b0111], [0b0110], [0b1000]], dtype=np.uint64)
    inter = _kernels.pairwise_intersections(bits)
    assert inter[0, 0] == 3
    assert inter[0, 1] == 2
    assert inter[0, 2] == 0
    assert inter[1, 2] == 0


@requires_numba
def test_thread_count_does_not_change_results():
    import numba

    ch = B.bsc(0.11)
    code = B.build_random_code(ch, 8, 16, seed=9)
    _kernels.set_backend("numba")
    try:
        numba.set_num_threads(1)
        R1, d1 = _kernels.confusion_matrix(ch.transition, code.codewords, 2**8)
        numba.set_num_threads(numba.config.NUMBA_NUM_THREADS)
        R2, d2 = _kernels.confusion_matrix(ch.transition, code.codewords, 2**8)
    finally:
        numba.set_num_threads(numba.config.NUMBA_NUM_THREADS)
    assert np.array_equal(d1, d2)
    assert np.array_equal(R1, R2)  # byte identical, not just close


def test_backend_flag_roundtrip():
    start = _kernels.active_backend()
    _kernels.set_backend("numpy")
    assert _kernels.active_backend() == "numpy"
    _kernels.set_backend(start)
    with pytest.raises(ValueError):
        _kernels.set_backend("fortran")


def test_eval_errors_backend_consistency(both_backends):
    ch = B.bsc(0.05)
    inner = B.build_random_code(ch, 5, 8, seed=11)
    fam = B.build_family_greedy(8, 0.125, 0.45, 8, seed=1)
    from bfclab import boolfn as BF

    funcs = [BF.make_rank(3, r) for r in range(8)]
    code = B.assemble_bfc(inner, fam, funcs)
    res = both_backends(B.eval_errors, code, ch, "exact")
    if len(res) == 1:
        pytest.skip("single backend available")
    assert res["numpy"].lambda1_max == pytest.approx(
        res["numba"].lambda1_max, abs=1e-13
    )
    assert res["numpy"].lambda2_max == pytest.approx(
        res["numba"].lambda2_max, abs=1e-13
    )
