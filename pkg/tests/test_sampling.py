import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from gsliced.sampling import (
    DatasetError,
    RngStream,
    SampleSet,
    derive_key,
    gaussian_noise,
    gen_gaussian,
    load_csv,
    sample_sphere,
)


def test_streams_are_pure_functions_of_seed_and_path():
    a = RngStream(7, (1, 2)).generator().standard_normal(5)
    b = RngStream(7, (1, 2)).generator().standard_normal(5)
    c = RngStream(7, (1, 3)).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_child_extends_path():
    s = RngStream(3, (4,))
    assert s.child(5, 6).stream_path == (4, 5, 6)


def test_label_range_enforced():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(0, (1 << 64,))


def test_derive_key_stable_and_64_bit():
    assert derive_key("csv", "/a") == derive_key("csv", "/a")
    assert derive_key("csv", "/a") != derive_key("csv", "/b")
    assert 0 <= derive_key(1, 2, "x") < 2**64


@pytest.mark.parametrize("d", [1, 2, 3, 10, 50])
def test_sphere_rows_have_unit_norm(d):
    u = sample_sphere(RngStream(1), d, 200)
    assert u.shape == (200, d)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, rtol=1e-12)


def test_sphere_prefix_stable_in_L():
    s = RngStream(11, (9,))
    assert np.array_equal(sample_sphere(s, 5, 7), sample_sphere(s, 5, 40)[:7])


def test_sphere_uniform_in_3d_chi_square():
    # Archimedes: the z coordinate of a uniform point on S^2 is uniform on [-1, 1]
    u = sample_sphere(RngStream(2024), 3, 20000)
    counts, _ = np.histogram(u[:, 2], bins=20, range=(-1, 1))
    assert stats.chisquare(counts).pvalue > 1e-3


def test_sphere_moments_match_uniform_law():
    d = 6
    u = sample_sphere(RngStream(5), d, 40000)
    np.testing.assert_allclose(u.mean(axis=0), 0.0, atol=0.02)
    np.testing.assert_allclose(np.cov(u.T), np.eye(d) / d, atol=0.01)


def test_sphere_redraws_zero_rows(monkeypatch):
    calls = {"n": 0}
    real = RngStream.generator

    def fake(self):
        g = real(self)
        if self.stream_path == (1,) and calls["n"] == 0:
            calls["n"] += 1

            class Zero:
                def standard_normal(self, shape):
                    z = g.standard_normal(shape)
                    z[1] = 0.0
                    return z
            return Zero()
        return g

    monkeypatch.setattr(RngStream, "generator", fake)
    u = sample_sphere(RngStream(0, (1,)), 4, 3)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0)


def test_sphere_rejects_bad_sizes():
    with pytest.raises(ValueError):
        sample_sphere(RngStream(0), 0, 3)
    with pytest.raises(ValueError):
        sample_sphere(RngStream(0), 3, 0)


def test_noise_moments():
    z = gaussian_noise(RngStream(8), 200000, 2.5)
    assert abs(z.mean()) < 0.02
    assert abs(z.std() - 2.5) < 0.02
    assert abs(stats.kurtosis(z)) < 0.05


def test_noise_zero_sigma_and_scaling():
    s = RngStream(8, (3,))
    assert np.array_equal(gaussian_noise(s, 10, 0.0), np.zeros(10))
    np.testing.assert_array_equal(gaussian_noise(s, 10, 2.0), 2.0 * gaussian_noise(s, 10, 1.0))
    with pytest.raises(ValueError):
        gaussian_noise(s, 3, -1.0)


def test_gen_gaussian_shape_and_key():
    s = RngStream(1, (2,))
    x = gen_gaussian(s, 300, 4, mean=[1, 2, 3, 4], scale=2.0)
    assert (x.n, x.d) == (300, 4)
    assert x.noise_key == s.key64()
    np.testing.assert_allclose(x.points.mean(axis=0), [1, 2, 3, 4], atol=0.4)
    with pytest.raises(ValueError):
        gen_gaussian(s, 3, 2, 0.0, 0.0)


def test_sampleset_validation_and_readonly():
    x = SampleSet([[1.0, 2.0], [3.0, 4.0]], noise_key=5)
    with pytest.raises(ValueError):
        x.points[0, 0] = 9.0
    assert SampleSet([1.0, 2.0, 3.0]).d == 1
    with pytest.raises(ValueError):
        SampleSet([[np.nan, 1.0]])
    with pytest.raises(ValueError):
        SampleSet(np.zeros((0, 3)))


def test_load_csv_header_blank_lines_and_key(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x,y\n1,2\n\n3,4.5\n")
    s = load_csv(p)
    np.testing.assert_array_equal(s.points, [[1, 2], [3, 4.5]])
    assert s.noise_key == load_csv(p).noise_key
    q = tmp_path / "b.csv"
    q.write_text("1,2\n3,4.5\n")
    assert load_csv(q).noise_key != s.noise_key
    assert load_csv(q, noise_key=s.noise_key).noise_key == s.noise_key


@pytest.mark.parametrize("text, needle", [
    ("", "empty dataset"),
    ("a,b\n", "empty dataset"),
    ("1,2\n3\n", "row 2 has 1 columns"),
    ("1,2\n3,zz\n", "row 2, column 2"),
    ("1,2\n3,nan\n", "column 2"),
])
def test_load_csv_errors(tmp_path, text, needle):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(DatasetError, match=needle):
        load_csv(p)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**64 - 1), st.lists(st.integers(0, 2**64 - 1), max_size=4))
def test_stream_draws_reproducible(seed, path):
    s = RngStream(seed, tuple(path))
    assert np.array_equal(s.generator().random(3), s.generator().random(3))
