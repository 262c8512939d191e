import json
import pytest
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from wearclust.errors import DataError
from wearclust.features import FeatureMatrix, align_blocks
from wearclust.streams import segment_blocks
from wearclust.stats import pearson, correlation_report, ScatterPair
from wearclust.synth import ActivitySchedule, gen_sensor_streams


### CHECK PEARSON

@pytest.mark.parametrize('x, y, r', [([1, 2, 3], [1, 2, 3], 1.),
                                     ([1, 2, 3], [3, 2, 1], -1.),
                                     ([1, 2, 3, 4], [2, 1, 4, 3], .6)])
def test_pearson_examples(x, y, r):
    assert_allclose(pearson(x, y), r, atol=1e-15)


@pytest.mark.parametrize('x, y', [([1, 2, 3], [1, 2]),
                                  ([1], [1]),
                                  ([2, 2, 2], [1, 2, 3]),
                                  ([1, 2, 3], [5, 5, 5])])
def test_pearson_errors(x, y):
    with pytest.raises(DataError):
        pearson(x, y)


def test_pearson_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = rng.integers(2, 50)
        x = rng.normal(size=n) * rng.uniform(.1, 100.)
        y = .3 * x + rng.normal(size=n)
        assert abs(pearson(x, y) - _pearson_textbook(x, y)) < 1e-12


def test_pearson_symmetric():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=(2, 100))
    assert pearson(x, y) == pearson(y, x)


@pytest.mark.parametrize('a, b', [(2., 1.), (-3., 5.), (1e-3, -.07)])
def test_pearson_affine(a, b):
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=(2, 100))
    assert_allclose(pearson(a * x + b, y), np.sign(a) * pearson(x, y), atol=1e-12)


def test_pearson_large_offset():
    t = 1.5e12 + np.arange(100.)
    assert_allclose(pearson(t, np.arange(100.)), 1., atol=1e-12)


def test_pearson_tiny_magnitudes():
    assert_allclose(pearson([1e-200, 2e-200, 3e-200], [1., 2., 3.]), 1., atol=1e-12)
    assert_allclose(pearson([1e-200, 2e-200, 3e-200], [3e-300, 1e-300, 2e-300]), -.5, atol=1e-12)


### CHECK CORRELATION REPORT

def test_report_identical_columns():
    x = np.arange(10.)
    report = correlation_report(FeatureMatrix(np.column_stack((x, x)), ['a', 'b']))
    assert report.coefficient('a', 'b') == 1.


def test_report_shape():
    rng = np.random.default_rng(3)
    m = FeatureMatrix(rng.normal(size=(40, 4)), ['a', 'b', 'c', 'd'])
    report = correlation_report(m, bins=5)

    assert report.r.shape == (4, 4)
    assert_array_equal(report.r, report.r.T)
    assert_array_equal(np.diag(report.r), 1.)
    assert np.all(np.abs(report.r) <= 1. + 1e-12)
    assert len(report.pairs) == 6
    assert [(p.x, p.y) for p in report.pairs][:3] == [('a', 'b'), ('a', 'c'), ('a', 'd')]

    for i, name in enumerate(m.column_names):
        edges, counts = report.histograms[name]
        assert len(edges) == 6
        assert counts.sum() == 40
        assert edges[0] == m.values[:, i].min()
        assert edges[-1] == m.values[:, i].max()


def test_report_constant_column():
    m = FeatureMatrix([[1., 5.], [2., 5.], [3., 5.]], ['a', 'b'])
    report = correlation_report(m)
    assert np.isnan(report.r[0, 1])
    assert report.undefined[0, 1] and report.undefined[1, 0]
    assert report.r[1, 1] == 1.
    assert json.loads(report.to_json())['r'][0][1] is None


def test_report_tiny_column():
    m = FeatureMatrix([[1e-200, 1.], [2e-200, 2.], [3e-200, 3.]], ['a', 'b'])
    report = correlation_report(m)
    assert not report.undefined[0, 1]
    assert_allclose(report.coefficient('a', 'b'), 1., atol=1e-12)


def test_report_errors():
    with pytest.raises(DataError):
        correlation_report(FeatureMatrix([[1., 2.]], ['a', 'b']))
    with pytest.raises(DataError):
        correlation_report(FeatureMatrix([[1.], [2.]], ['a']))


def test_scatter_reference_line():
    x = np.arange(20.)
    pair = ScatterPair('a', 'b', np.column_stack((x, 3. * x + 2.)))
    assert_allclose(pair.slope, 3.)
    assert_allclose(pair.intercept, 2., atol=1e-12)
    assert_allclose(pair.standardized_slope, 1.)
    assert pair.to_csv().splitlines()[0] == 'a,b'


def test_scatter_standardized_slope():
    rng = np.random.default_rng(4)
    x = rng.normal(size=200) * 20. + 80.
    y = .01 * x + rng.normal(size=200) * .1
    pair = ScatterPair('heart_rate', 'accel_mag', np.column_stack((x, y)))
    zx = (x - x.mean()) / x.std()
    zy = (y - y.mean()) / y.std()
    assert_allclose(pair.standardized_slope, np.polyfit(zx, zy, 1)[0], rtol=1e-9)


### CHECK CORRELATION SIGN

@pytest.mark.parametrize('seed', range(5))
def test_coupled_heart_rate_correlates_with_acceleration(seed):
    streams = gen_sensor_streams(ActivitySchedule.mixed(3600, coupling=.8), seed=seed,
                                 recording=(180000, 180000))
    segmentation = segment_blocks(streams.values(), subject_id='S%02d' % seed)

    for recipe, columns in [('hr_accel_mag', ['accel_mag']),
                            ('hr_accel_xyz', ['accel_x', 'accel_y'])]:
        report = correlation_report(align_blocks(segmentation, recipe=recipe))
        for column in columns:
            assert report.coefficient('heart_rate', column) > 0


### STANDARD TEST OBJECTS

def _pearson_textbook(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx)**2 for a in x)
    syy = sum((b - my)**2 for b in y)
    return sxy / (sxx * syy)**.5
