import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import gaussian_value
from subpixel_heatmaps.encoder import (
    EncoderConfig,
    GridSpec,
    encode_landmarks,
    render_gaussian,
    round_half_away,
    scale_coords,
)
from subpixel_heatmaps.geometry import LandmarkSet

GRID = GridSpec(64, 64, 4.0)


@pytest.mark.parametrize(
    "mode, expected",
    [("none", (10.3, 20.725)), ("round", (10.0, 21.0)), ("floor", (10.0, 20.0))],
)
def test_scale_coords(mode, expected):
    out = scale_coords(LandmarkSet(np.array([[41.2, 82.9]])), GRID, mode)
    np.testing.assert_allclose(out.points[0], expected, rtol=0, atol=1e-12)
    assert out.visibility[0]


def test_round_ties_away_from_zero():
    np.testing.assert_array_equal(
        round_half_away([0.5, 1.5, 2.5, -0.5, -2.5, 0.49999999999999994]),
        [1.0, 2.0, 3.0, -1.0, -3.0, 0.0],
    )


def test_off_grid_landmarks_become_invisible():
    lm = LandmarkSet(np.array([[-10.0, 8.0], [8.0, 300.0], [8.0, 8.0]]))
    out = scale_coords(lm, GRID, "none")
    np.testing.assert_array_equal(out.visibility, [False, False, True])
    np.testing.assert_allclose(out.points[0], [-2.5, 2.0])


def test_config_validation():
    with pytest.raises(ValueError):
        EncoderConfig(sigma=0.0)
    with pytest.raises(ValueError):
        EncoderConfig(sigma=1.0, truncation_radius=2)
    with pytest.raises(ValueError):
        GridSpec(3, 64, 4.0)
    with pytest.raises(ValueError):
        GridSpec(64, 64, 0.0)


def test_pdf_values(backend):
    hm = render_gaussian((10.0, 20.0), GRID, EncoderConfig(sigma=1.0, normalization="pdf"))
    assert hm.shape == (64, 64)
    assert hm[20, 10] == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    assert hm[20, 10] == pytest.approx(0.159155, abs=1e-6)
    assert hm[20, 11] == pytest.approx(math.exp(-0.5) / (2 * math.pi), rel=1e-14)
    assert hm[20, 11] == pytest.approx(0.096532, abs=1e-6)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.3])
def test_amplitude_one_peak(backend, sigma):
    hm = render_gaussian((17.0, 40.0), GRID, EncoderConfig(sigma=sigma))
    assert hm[40, 17] == 1.0
    assert hm.max() == 1.0


def test_render_matches_direct_formula(backend):
    cfg = EncoderConfig(sigma=1.7)
    hm = render_gaussian((30.25, 12.8), GRID, cfg)
    for y in range(64):
        for x in range(64):
            assert hm[y, x] == pytest.approx(gaussian_value(x, y, 30.25, 12.8, 1.7), rel=1e-13, abs=1e-300)


def test_truncation(backend):
    cfg = EncoderConfig(sigma=1.0, truncation_radius=3)
    hm = render_gaussian((20.4, 30.0), GRID, cfg)
    full = render_gaussian((20.4, 30.0), GRID, EncoderConfig(sigma=1.0))
    xs = np.arange(64)
    outside = (np.abs(xs - 20.4) > 3)[None, :] | (np.abs(xs - 30.0) > 3)[:, None]
    assert np.all(hm[outside] == 0.0)
    np.testing.assert_array_equal(hm[~outside], full[~outside])


def test_encode_stack_and_visibility(backend):
    cfg = EncoderConfig(sigma=1.0)
    lm = LandmarkSet(np.array([[40.0, 80.0], [100.0, 120.0]]), [True, False])
    stack = encode_landmarks(lm, GRID, cfg)
    assert stack.shape == (2, 64, 64)
    np.testing.assert_array_equal(stack[0], render_gaussian((10.0, 20.0), GRID, cfg))
    assert not stack[1].any()


def test_continuous_equals_round_on_integer_points(backend):
    lm = LandmarkSet(np.array([[40.0, 80.0], [4.0, 252.0], [128.0, 0.0]]))
    a = encode_landmarks(lm, GRID, EncoderConfig(quantize_mode="none"))
    b = encode_landmarks(lm, GRID, EncoderConfig(quantize_mode="round"))
    assert np.array_equal(a, b)


@settings(max_examples=50, deadline=None)
@given(st.integers(5, 58), st.integers(5, 58), st.floats(0.4, 3.0))
def test_integer_center_symmetry(cx, cy, sigma):
    hm = render_gaussian((cx, cy), GRID, EncoderConfig(sigma=sigma))
    for a in range(-5, 6):
        for b in range(-5, 6):
            if 0 <= cx + a < 64 and 0 <= cx - a < 64 and 0 <= cy + b < 64 and 0 <= cy - b < 64:
                assert hm[cy + b, cx + a] == hm[cy - b, cx - a]


@settings(max_examples=50, deadline=None)
@given(st.floats(4.0, 59.0), st.floats(4.0, 59.0), st.floats(0.5, 2.0))
def test_monotone_decay_along_axes(cx, cy, sigma):
    hm = render_gaussian((cx, cy), GRID, EncoderConfig(sigma=sigma))
    px, py = int(round_half_away(cx)), int(round_half_away(cy))
    for ray in (hm[py, px:], hm[py, px::-1], hm[py:, px], hm[py::-1, px]):
        pos = ray[ray > 0]
        assert np.all(np.diff(pos) < 0)  # strict while the exponential is representable
        assert np.all(np.diff(ray) <= 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(2.0, 61.0), st.floats(2.0, 61.0))
def test_argmax_is_rounded_center(cx, cy):
    frac = (cx % 1, cy % 1)
    if 0.5 in frac:
        return
    hm = render_gaussian((cx, cy), GRID, EncoderConfig(sigma=1.0))
    y, x = np.unravel_index(np.argmax(hm), hm.shape)
    assert (x, y) == (int(round_half_away(cx)), int(round_half_away(cy)))
