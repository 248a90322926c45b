import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fractgv import FormatError, NoiseSpec, Signal, add_noise, gen_signal, l2_dist_sq, load_signal
from fractgv import make_grid, save_signal, standard_signal, tv
from fractgv.signal import STANDARD_SIGNALS, Affine, Constant, Sine, gaussian_samples, mean

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
sample_lists = st.lists(finite, min_size=2, max_size=40)


def test_grid_nodes():
    g = make_grid(2)
    assert g.h == 0.5
    np.testing.assert_array_equal(g.nodes, [0.25, 0.75])
    np.testing.assert_array_equal(make_grid(4).nodes, [0.125, 0.375, 0.625, 0.875])


@pytest.mark.parametrize("n", [1, 0, -3])
def test_grid_too_small(n):
    with pytest.raises(ValueError):
        make_grid(n)


@given(st.integers(2, 5000))
def test_grid_invariants(n):
    x = make_grid(n).nodes
    assert x[0] > 0 and x[-1] < 1
    np.testing.assert_allclose(np.diff(x), 1.0 / n, rtol=1e-9)


def test_signal_rejects_bad_values():
    g = make_grid(3)
    with pytest.raises(ValueError):
        Signal(g, [1.0, 2.0])
    with pytest.raises(ValueError):
        Signal(g, [1.0, np.nan, 0.0])


def test_signal_values_read_only():
    u = Signal.from_values([1.0, 2.0])
    with pytest.raises(ValueError):
        u.values[0] = 5.0


def test_gen_signal_examples():
    np.testing.assert_array_equal(gen_signal(make_grid(4), [Constant(1.0)]).values, [1, 1, 1, 1])
    np.testing.assert_array_equal(gen_signal(make_grid(2), [Affine(1.0, 0.0)]).values, [0.25, 0.75])
    step = gen_signal(make_grid(2), [Constant(0.0), Constant(1.0)], [0.5])
    np.testing.assert_array_equal(step.values, [0.0, 1.0])


@pytest.mark.parametrize("breaks", [[0.6, 0.4], [-0.1, 0.5], [0.5, 1.2]])
def test_gen_signal_bad_breakpoints(breaks):
    with pytest.raises(ValueError):
        gen_signal(make_grid(8), [Constant(0.0)] * 3, breaks)


def test_gen_signal_piece_count():
    with pytest.raises(ValueError):
        gen_signal(make_grid(8), [Constant(0.0), Constant(1.0)], [])


def test_sine_piece():
    g = make_grid(64)
    u = gen_signal(g, [Sine(2.0, 1.0)])
    np.testing.assert_allclose(u.values, 2.0 * np.sin(2 * np.pi * g.nodes))


@given(
    st.lists(st.floats(0.0, 5.0), min_size=1, max_size=4),
    st.integers(4, 200),
)
def test_monotone_pieces_give_monotone_samples(slopes, n):
    # continuous increasing piecewise-affine signal
    k = len(slopes)
    breaks = [(j + 1) / k for j in range(k - 1)]
    pieces, level, start = [], 0.0, 0.0
    for j, c in enumerate(slopes):
        pieces.append(Affine(c, level - c * start))
        end = breaks[j] if j < k - 1 else 1.0
        level += c * (end - start)
        start = end
    u = gen_signal(make_grid(n), pieces, breaks)
    assert np.all(np.diff(u.values) >= -1e-12)


@pytest.mark.parametrize("kind", sorted(STANDARD_SIGNALS))
def test_standard_signals_sample(kind):
    u = standard_signal(kind, make_grid(128))
    assert u.n == 128 and np.all(np.isfinite(u.values))


def test_corner_signal_is_continuous():
    u = standard_signal("corner", make_grid(4096))
    assert np.max(np.abs(np.diff(u.values))) < 3 * 2.0 / 4096


def test_unknown_kind():
    with pytest.raises(ValueError):
        standard_signal("zigzag", make_grid(8))


def test_noise_zero_sigma_is_identity():
    u = standard_signal("corner", make_grid(32))
    assert add_noise(u, NoiseSpec(0.0, 123)) == u


@given(st.integers(0, 2**64 - 1), st.integers(2, 300))
def test_noise_zero_mean(seed, n):
    u = Signal(make_grid(n), np.zeros(n))
    out = add_noise(u, NoiseSpec(0.3, seed, zero_mean=True))
    assert abs(u.h * np.sum(out.values - u.values)) <= 1e-12


@given(st.integers(0, 2**64 - 1))
def test_noise_replay_identical(seed):
    u = standard_signal("step", make_grid(50))
    a = add_noise(u, NoiseSpec(0.1, seed))
    b = add_noise(u, NoiseSpec(0.1, seed))
    assert np.array_equal(a.values, b.values)


def test_noise_seeds_differ():
    u = standard_signal("step", make_grid(50))
    assert add_noise(u, NoiseSpec(0.1, 1)) != add_noise(u, NoiseSpec(0.1, 2))


def test_gaussian_samples_statistics():
    z = gaussian_samples(200001, 5)
    assert abs(z.mean()) < 0.01
    assert abs(z.std() - 1.0) < 0.01
    # prefix property: odd lengths are truncations of the next even length
    np.testing.assert_array_equal(gaussian_samples(7, 3), gaussian_samples(8, 3)[:7])


@pytest.mark.parametrize("spec", [dict(sigma=-1.0), dict(sigma=np.inf), dict(sigma=0.1, seed=2**64)])
def test_noise_spec_validation(spec):
    with pytest.raises(ValueError):
        NoiseSpec(**spec)


def test_l2_examples():
    zero = Signal.from_values([0.0, 0.0])
    assert l2_dist_sq(Signal.from_values([1.0, 1.0]), zero) == 1.0
    assert l2_dist_sq(Signal.from_values([0.0, 1.0]), zero) == 0.5
    assert l2_dist_sq(zero, zero) == 0.0


def test_l2_grid_mismatch():
    with pytest.raises(ValueError):
        l2_dist_sq(Signal.from_values([0.0, 0.0]), Signal.from_values([0.0, 0.0, 0.0]))


@given(st.integers(2, 30).flatmap(lambda n: st.tuples(
    st.lists(finite, min_size=n, max_size=n), st.lists(finite, min_size=n, max_size=n))))
def test_l2_properties(pair):
    u, v = (Signal.from_values(a) for a in pair)
    d = l2_dist_sq(u, v)
    assert d >= 0.0
    assert d == l2_dist_sq(v, u)
    if np.array_equal(u.values, v.values):
        assert d == 0.0
    elif np.max(np.abs(u.values - v.values)) > 1e-100:
        assert d > 0.0


def test_tv_examples():
    assert tv(Signal.from_values([3.0, 3.0, 3.0])) == 0.0
    assert tv(Signal.from_values([0.0, 0.0, 1.0, 1.0])) == 1.0
    for n in (2, 7, 64, 1000):
        g = make_grid(n)
        assert tv(Signal(g, g.nodes)) == pytest.approx(1.0 - g.h, rel=1e-12)


@given(sample_lists, finite, st.floats(-10, 10))
def test_tv_shift_and_scale(values, c, lam):
    u = np.array(values)
    assert tv(u + c) == pytest.approx(tv(u), rel=1e-9, abs=1e-9)
    assert tv(lam * u) == pytest.approx(abs(lam) * tv(u), rel=1e-9, abs=1e-9)


def test_mean():
    assert mean(Signal.from_values([1.0, 3.0])) == 2.0


def test_load_example(tmp_path):
    path = tmp_path / "u.csv"
    path.write_text("1.0\n2.0\n")
    u = load_signal(path)
    assert u.n == 2
    np.testing.assert_array_equal(u.values, [1.0, 2.0])


def test_load_crlf(tmp_path):
    path = tmp_path / "u.csv"
    path.write_bytes(b"1.5\r\n-2\r\n")
    np.testing.assert_array_equal(load_signal(path).values, [1.5, -2.0])


def test_load_reports_line(tmp_path):
    path = tmp_path / "u.csv"
    path.write_text("1.0\nabc\n")
    with pytest.raises(FormatError) as info:
        load_signal(path)
    assert info.value.lineno == 2
    assert ":2:" in str(info.value)


def test_load_missing_file(tmp_path):
    with pytest.raises(FormatError):
        load_signal(tmp_path / "nope.csv")


def test_load_rejects_nonfinite_and_short(tmp_path):
    path = tmp_path / "u.csv"
    path.write_text("1.0\ninf\n")
    with pytest.raises(FormatError):
        load_signal(path)
    path.write_text("1.0\n")
    with pytest.raises(FormatError):
        load_signal(path)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=2, max_size=30))
def test_save_load_round_trip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "u.csv"
    u = Signal.from_values(values)
    save_signal(u, path)
    assert load_signal(path) == u
    assert b"\r" not in path.read_bytes()
