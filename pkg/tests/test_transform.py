import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fedft import (
    DctVariant, dct_forward, dct_inverse, gaussian_model, inverse_model,
    reconstruction_error, transform_model,
)

from oracles import dct_multisum, dct_separable

VARIANTS = [DctVariant.I, DctVariant.II, DctVariant.III, DctVariant.IV]


def test_parse_variant_spellings():
    for v in ("IV", "iv", 4, "DCT-IV", "dct4", DctVariant.IV):
        assert DctVariant.parse(v) is DctVariant.IV
    with pytest.raises(ValueError):
        DctVariant.parse("V")


def test_single_element_dct4():
    # one input, one output: cos(pi/4)
    assert dct_forward(np.array([1.0]))[0] == pytest.approx(math.cos(math.pi / 4), abs=1e-15)


def test_dct2_constant_vector():
    # a constant input only excites the zero-frequency coefficient
    out = dct_forward(np.ones(8), DctVariant.II)
    assert out[0] == pytest.approx(8.0)
    np.testing.assert_allclose(out[1:], 0.0, atol=1e-12)


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("shape", [(7,), (4, 5), (3, 2, 4), (2, 3, 2, 2)])
def test_matches_multisum_oracle(variant, shape, rng):
    x = rng.standard_normal(shape)
    np.testing.assert_allclose(dct_forward(x, variant), dct_multisum(x, variant.value),
                               atol=1e-12, rtol=0)


@pytest.mark.parametrize("variant", VARIANTS)
def test_round_trip_5x3x2(variant, rng):
    x = rng.standard_normal((5, 3, 2))
    err = np.abs(dct_inverse(dct_forward(x, variant), variant) - x).max()
    assert err < 1e-10


@pytest.mark.parametrize("variant", VARIANTS)
def test_fft_path_matches_direct(variant, rng):
    x = rng.standard_normal((6, 9, 3))
    np.testing.assert_allclose(dct_forward(x, variant, "fft"), dct_forward(x, variant),
                               atol=1e-11)
    np.testing.assert_allclose(dct_inverse(x, variant, "fft"), dct_inverse(x, variant),
                               atol=1e-11)


def test_dct1_needs_two_samples_per_axis():
    with pytest.raises(ValueError):
        dct_forward(np.ones((3, 1)), DctVariant.I)


def test_empty_tensor_rejected():
    with pytest.raises(ValueError):
        dct_forward(np.zeros((0, 3)))


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        dct_forward(np.ones(3), method="magic")


def test_energy_scaling_dct4(rng):
    # the unnormalised DCT-IV is sqrt(N/2) times an orthogonal map, per axis
    x = rng.standard_normal((6, 10))
    y = dct_forward(x)
    assert (y ** 2).sum() == pytest.approx((6 / 2) * (10 / 2) * (x ** 2).sum(), rel=1e-12)


def test_separable_equals_axis_by_axis(rng):
    x = rng.standard_normal((4, 7))
    rows = np.stack([dct_forward(r) for r in x])
    both = np.stack([dct_forward(c) for c in rows.T]).T
    np.testing.assert_allclose(dct_forward(x), both, atol=1e-12)


def test_model_transform_keeps_names_and_shapes():
    m = gaussian_model([(3, 4), (4,)], seed=0, names=["w", "b"])
    f = transform_model(m)
    assert f.names == ("w", "b") and f.shapes == m.shapes
    np.testing.assert_allclose(inverse_model(f).flatten(), m.flatten(), atol=1e-12)


def test_reconstruction_error_small():
    m = gaussian_model([(50, 10), (10,)], stddev=0.3, seed=5)
    mx, mean = reconstruction_error(m)
    assert mx < 1e-12 and mean <= mx


def test_reconstruction_error_non_decreasing_in_stddev():
    errs = []
    for sd in (0.1, 0.2, 0.3, 0.4, 0.5):
        m = gaussian_model([(784, 10), (10,)], stddev=sd, seed=0)
        errs.append(reconstruction_error(m)[1])
    assert all(a <= b for a, b in zip(errs, errs[1:])), errs


small_arrays = arrays(
    np.float64,
    st.lists(st.integers(1, 6), min_size=1, max_size=3).map(tuple),
    elements=st.floats(-1e3, 1e3, allow_nan=False),
)


@given(small_arrays, st.sampled_from([DctVariant.II, DctVariant.III, DctVariant.IV]))
def test_round_trip_property(x, variant):
    back = dct_inverse(dct_forward(x, variant), variant)
    np.testing.assert_allclose(back, x, atol=1e-9 * max(1.0, np.abs(x).max()))


@given(small_arrays, st.floats(-10, 10), st.floats(-10, 10))
def test_linearity_property(x, a, b):
    y = np.cos(np.arange(x.size, dtype=np.float64)).reshape(x.shape)
    lhs = dct_forward(a * x + b * y)
    rhs = a * dct_forward(x) + b * dct_forward(y)
    scale = max(1.0, np.abs(lhs).max())
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * scale)


@given(small_arrays)
def test_matches_separable_oracle_property(x):
    np.testing.assert_allclose(dct_forward(x), dct_separable(x),
                               atol=1e-10 * max(1.0, np.abs(x).sum()))
