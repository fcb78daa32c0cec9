import numpy as np
import pytest

from lsrk import (DimensionMismatchError, FileFormatError, bdiag,
                  dense_tensor, frobenius_norm, horizontal_slice,
                  horizontal_subtensor, inner_product, load_tns, save_tns)


def loop_frobenius(t):
    acc = 0.0
    for v in np.asarray(t).reshape(-1):
        acc += v * v
    return np.sqrt(acc)


def loop_inner(a, b):
    acc = 0.0
    for x, y in zip(np.asarray(a).reshape(-1), np.asarray(b).reshape(-1)):
        acc += x * y
    return acc


def test_frobenius_zero():
    assert frobenius_norm(np.zeros((2, 3, 4))) == 0.0


def test_frobenius_single_entry():
    t = np.zeros((2, 2, 2))
    t[1, 0, 1] = 3.0
    assert frobenius_norm(t) == 3.0


def test_frobenius_matches_scalar_loop():
    rng = np.random.default_rng(0)
    t = rng.standard_normal((2, 2, 2))
    assert abs(frobenius_norm(t) - loop_frobenius(t)) <= 1e-12


def test_inner_product_zero_annihilates():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((3, 2, 2))
    assert inner_product(a, np.zeros_like(a)) == 0.0


def test_inner_product_hand_sum():
    a = np.array([1.0, 2.0]).reshape(1, 1, 2)
    assert inner_product(a, a) == 5.0


def test_inner_product_matches_scalar_loop():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((3, 2, 4))
    b = rng.standard_normal((3, 2, 4))
    assert abs(inner_product(a, b) - loop_inner(a, b)) <= 1e-12
    assert inner_product(a, b) == pytest.approx(inner_product(b, a))
    assert inner_product(a, a) == pytest.approx(frobenius_norm(a) ** 2)


def test_inner_product_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        inner_product(np.zeros((2, 2, 2)), np.zeros((2, 2, 3)))


def test_cauchy_schwarz():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.standard_normal((2, 3, 2))
        b = rng.standard_normal((2, 3, 2))
        assert abs(inner_product(a, b)) <= \
            frobenius_norm(a) * frobenius_norm(b) + 1e-12


def test_dense_tensor_rejects_nan_and_low_order():
    with pytest.raises(ValueError):
        dense_tensor(np.array([[[np.nan]]]))
    with pytest.raises(DimensionMismatchError):
        dense_tensor(np.zeros((2, 2)))


def test_dense_tensor_is_readonly():
    t = dense_tensor(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        t[0, 0, 0] = 1.0


def test_horizontal_slice_definitional():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((3, 2, 2))
    s = horizontal_slice(a, 2)
    assert s.shape == (1, 2, 2)
    for j in range(2):
        for k in range(2):
            assert s[0, j, k] == a[1, j, k]


def test_horizontal_slice_first_slab():
    a = np.zeros((2, 2, 2))
    a[0] = 1.0
    assert np.array_equal(horizontal_slice(a, 1), a[:1])


def test_horizontal_slice_copies_not_aliases():
    a = np.array(np.random.default_rng(5).standard_normal((2, 2, 2)))
    s = horizontal_slice(a, 1)
    s[0, 0, 0] = 99.0
    assert a[0, 0, 0] != 99.0


def test_slice_restack_roundtrip_bitwise():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((4, 3, 2))
    stacked = np.concatenate([horizontal_slice(a, i) for i in range(1, 5)])
    assert np.array_equal(stacked, a)


def test_slice_index_out_of_range():
    a = np.zeros((3, 2, 2))
    with pytest.raises(IndexError):
        horizontal_slice(a, 0)
    with pytest.raises(IndexError):
        horizontal_slice(a, 4)


def test_subtensor_full_selection():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((3, 2, 2))
    assert np.array_equal(horizontal_subtensor(a, list(range(1, 4))), a)


def test_subtensor_singleton_matches_slice():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((3, 2, 2))
    assert np.array_equal(horizontal_subtensor(a, [2]),
                          horizontal_slice(a, 2))


def test_subtensor_respects_order():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((3, 2, 2))
    sub = horizontal_subtensor(a, [3, 1])
    for j in range(2):
        for k in range(2):
            assert sub[0, j, k] == a[2, j, k]
            assert sub[1, j, k] == a[0, j, k]


def test_subtensor_out_of_range():
    with pytest.raises(IndexError):
        horizontal_subtensor(np.zeros((3, 2, 2)), [1, 5])


def test_bdiag_single_face_is_the_face():
    rng = np.random.default_rng(10)
    a = rng.standard_normal((2, 2, 1, 1))
    assert np.array_equal(bdiag(a), a[:, :, 0, 0])


def test_bdiag_definitional_placement():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((2, 2, 2))
    m = bdiag(a)
    assert m.shape == (4, 4)
    assert np.array_equal(m[:2, :2], a[:, :, 0])
    assert np.array_equal(m[2:, 2:], a[:, :, 1])
    assert np.all(m[:2, 2:] == 0.0) and np.all(m[2:, :2] == 0.0)


def test_bdiag_face_order_varies_mode3_fastest():
    # face j of a n1 x n2 x 2 x 2 tensor: j-1 = (i3-1) + 2*(i4-1)
    a = np.zeros((1, 1, 2, 2))
    a[0, 0, 0, 0], a[0, 0, 1, 0], a[0, 0, 0, 1], a[0, 0, 1, 1] = 1, 2, 3, 4
    m = bdiag(a)
    assert np.array_equal(np.diag(m), [1, 2, 3, 4])


def test_bdiag_is_linear():
    rng = np.random.default_rng(12)
    a = rng.standard_normal((2, 3, 2))
    b = rng.standard_normal((2, 3, 2))
    assert np.array_equal(bdiag(2.0 * a + 0.5 * b),
                          2.0 * bdiag(a) + 0.5 * bdiag(b))


def test_tns1_roundtrip(tmp_path):
    rng = np.random.default_rng(13)
    t = rng.standard_normal((3, 2, 4, 2))
    path = tmp_path / "t.tns"
    save_tns(path, t)
    back = load_tns(path)
    assert np.array_equal(back, t)


def test_tns1_bad_magic(tmp_path):
    path = tmp_path / "bad.tns"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(FileFormatError):
        load_tns(path)


def test_tns1_low_order(tmp_path):
    import struct
    path = tmp_path / "low.tns"
    payload = b"TNS1" + struct.pack("<Q", 2) + struct.pack("<2Q", 2, 2) \
        + np.zeros(4).tobytes()
    path.write_bytes(payload)
    with pytest.raises(FileFormatError):
        load_tns(path)


def test_tns1_truncated_payload(tmp_path):
    import struct
    path = tmp_path / "trunc.tns"
    payload = b"TNS1" + struct.pack("<Q", 3) + struct.pack("<3Q", 2, 2, 2) \
        + np.zeros(7).tobytes()
    path.write_bytes(payload)
    with pytest.raises(FileFormatError):
        load_tns(path)
