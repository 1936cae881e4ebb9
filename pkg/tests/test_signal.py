import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmd.errors import InputError
from nmd.signal import (CsvFormatError, NormParams, Signal, closed_form, denormalize,
                        ingest_csv, normalize, read_signal_csv, synthesize, write_signal_csv)


# ── ingestion ────────────────────────────────────────────


def test_ingest_time_and_value():
    sig = ingest_csv("0,1.0\n1,2.0\n2,3.0\n3,4.0\n", layout="time-value")
    np.testing.assert_array_equal(sig.times, [0, 1, 2, 3])
    np.testing.assert_array_equal(sig.values, [1, 2, 3, 4])


def test_ingest_value_only_uses_implicit_index():
    sig = ingest_csv(io.StringIO("5\n5\n5\n5\n"), layout="value")
    np.testing.assert_array_equal(sig.times, [0, 1, 2, 3])
    np.testing.assert_array_equal(sig.values, [5, 5, 5, 5])


def test_ingest_reports_malformed_row():
    text = "0,1\n1,2\n2,3\na,b\n4,5\n"
    with pytest.raises(CsvFormatError) as info:
        ingest_csv(text, layout="time-value")
    assert info.value.row == 4
    assert "row 4" in str(info.value)


def test_ingest_skips_header_and_handles_crlf():
    sig = ingest_csv("month,passengers\r\n1,10\r\n2,11\r\n3,13\r\n4,12\r\n")
    np.testing.assert_array_equal(sig.values, [10, 11, 13, 12])
    np.testing.assert_array_equal(sig.times, [1, 2, 3, 4])


def test_ingest_autodetects_single_column():
    sig = ingest_csv("value\n1\n2\n3\n4\n5\n")
    assert len(sig) == 5
    np.testing.assert_array_equal(sig.times, np.arange(5))


@pytest.mark.parametrize("text", ["1\n2\n3\n", "t,x\n0,1\n1,2\n"])
def test_ingest_too_few_samples(text):
    with pytest.raises(InputError):
        ingest_csv(text)


def test_ingest_non_increasing_times():
    with pytest.raises(InputError, match="increasing"):
        ingest_csv("0,1\n1,2\n1,3\n2,4\n", layout="time-value")


def test_ingest_rejects_wrong_width():
    with pytest.raises(CsvFormatError):
        ingest_csv("0,1\n1,2,3\n2,3\n3,4\n")


def test_csv_round_trip(tmp_path):
    sig = synthesize("x2", 64)
    path = tmp_path / "sig.csv"
    write_signal_csv(path, sig)
    back = read_signal_csv(path)
    np.testing.assert_array_equal(back.times, sig.times)
    np.testing.assert_array_equal(back.values, sig.values)


# ── normalization ────────────────────────────────────────


def test_normalize_affine_example():
    norm_sig, params = normalize(Signal([0, 1, 2, 3], [1, 3, 2, 2]))
    np.testing.assert_allclose(norm_sig.times, [0, 1 / 3, 2 / 3, 1])
    np.testing.assert_allclose(norm_sig.values, [0, 1, 0.5, 0.5])
    assert params == NormParams(0, 3, 1, 3)


def test_normalize_fixed_point():
    sig = Signal([0, 0.25, 0.5, 1.0], [0, 1, 0.3, 0.7])
    out, params = normalize(sig)
    np.testing.assert_array_equal(out.values, sig.values)
    np.testing.assert_array_equal(out.times, sig.times)
    assert params == NormParams.identity()


def test_normalize_constant_series_errors():
    with pytest.raises(InputError, match="constant"):
        normalize(Signal([0, 1, 2, 3], [7, 7, 7, 7]))


def test_denormalize_examples():
    np.testing.assert_array_equal(denormalize([0, 1], NormParams(0, 1, 1, 3)), [1, 3])
    np.testing.assert_array_equal(denormalize([0.5], NormParams.identity()), [0.5])


def test_round_trip_random_64():
    rng = np.random.default_rng(3)
    sig = Signal(np.cumsum(rng.uniform(0.1, 2, 64)), rng.normal(0, 5, 64))
    out, params = normalize(sig)
    assert np.max(np.abs(denormalize(out.values, params) - sig.values)) <= 1e-12
    assert np.max(np.abs(params.denormalize_times(out.times) - sig.times)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=50).filter(lambda v: max(v) > min(v)),
       st.floats(-100, 100), st.floats(0.01, 10))
def test_round_trip_property(values, t0, dt):
    sig = Signal(t0 + dt * np.arange(len(values)), values)
    out, params = normalize(sig)
    assert out.values.min() == 0 and out.values.max() == 1
    assert out.times[0] == 0 and out.times[-1] == 1
    np.testing.assert_allclose(denormalize(out.values, params), sig.values, rtol=0, atol=1e-12 * max(1, np.abs(values).max()))
    np.testing.assert_allclose(params.denormalize_times(out.times), sig.times, rtol=0, atol=1e-12 * max(1, abs(t0) + dt * len(values)))


def test_signal_validation():
    with pytest.raises(InputError):
        Signal([0, 1, 2], [1, 2, 3])
    with pytest.raises(InputError):
        Signal([0, 1, 2, 3], [1, np.nan, 2, 3])
    with pytest.raises(InputError):
        Signal([0, 1, 2, 3], [1, 2, 3])


# ── synthetic signals ────────────────────────────────────


def test_xp_at_zero():
    assert synthesize("xp", 64).values[0] == pytest.approx(1.3125, abs=1e-15)


def test_x1_at_zero():
    assert synthesize("x1", 1000).values[0] == pytest.approx(2.0, abs=1e-15)


def test_seeded_noise_is_reproducible():
    a = synthesize("xlambda", 1000, 0.1, seed=11)
    b = synthesize("xlambda", 1000, 0.1, seed=11)
    c = synthesize("xlambda", 1000, 0.1, seed=12)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_grid_is_half_open():
    sig = synthesize("x2", 32)
    np.testing.assert_array_equal(sig.times, np.arange(32) / 32)


@pytest.mark.parametrize("kind", ["xlambda", "xp", "x1", "x2"])
def test_noiseless_matches_closed_form(kind):
    n = 257
    t = np.arange(n) / n
    direct = {
        "xlambda": 4 * t**2 + np.cos(8 * np.pi * t) + 2 * np.cos(40 * np.pi * t)
        + np.cos(50 * np.pi * t + 20 * np.pi * t**2),
        "xp": np.cos(4 * np.pi * t) + 0.25 * np.cos(48 * np.pi * t) + np.cos(200 * np.pi * t) / 16,
        "x1": 6 * t**2 + np.cos(10 * np.pi * t + 10 * np.pi * t**2)
        + np.array([np.cos(60 * np.pi * s) if s <= 0.5 else np.cos(80 * np.pi * s - 10 * np.pi) for s in t]),
        "x2": 1 / (1.2 + np.cos(2 * np.pi * t))
        + np.cos(32 * np.pi * t + 0.2 * np.cos(64 * np.pi * t)) / (1.5 + np.sin(2 * np.pi * t)),
    }[kind]
    assert np.max(np.abs(synthesize(kind, n).values - direct)) <= 1e-12


def test_noise_statistics():
    clean = synthesize("xp", 4096)
    noisy = synthesize("xp", 4096, 0.1, seed=1)
    eta = noisy.values - clean.values
    assert abs(eta.std() - 0.1) < 0.005
    assert abs(eta.mean()) < 0.006


def test_synthesize_rejects_short_and_unknown():
    with pytest.raises(InputError):
        synthesize("xp", 15)
    with pytest.raises(InputError):
        synthesize("square", 64)
    with pytest.raises(InputError):
        closed_form("nope", [0.0])
