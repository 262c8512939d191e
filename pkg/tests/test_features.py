import pytest
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from wearclust.errors import DataError, NumericalError, UsageError
from wearclust.streams import HEART_RATE, ACCELEROMETER, SensorStream, RecordingBlock, segment_blocks
from wearclust.features import (FeatureMatrix, read_matrix, align_features, align_blocks,
                                standardize, inverse_transform, whiten)
from wearclust.synth import ActivitySchedule, gen_sensor_streams


### CHECK FEATURE MATRIX

def test_matrix_shape():
    m = _generate_matrix()
    assert m.shape == (5, 3)
    assert m.column_names == ['a', 'b', 'c']
    assert m.row_keys[2] == ('', 2)
    assert_array_equal(m.column('b'), m.values[:, 1])


@pytest.mark.parametrize('values, columns', [
    (np.zeros((0, 2)), ['a', 'b']),
    (np.zeros((2, 0)), []),
    (np.zeros((2, 2)), ['a', 'a']),
    (np.zeros((2, 2)), ['a']),
    ([[1., np.nan]], ['a', 'b']),
    ([[1., np.inf]], ['a', 'b']),
])
def test_matrix_invalid(values, columns):
    with pytest.raises(DataError):
        FeatureMatrix(values, columns)


def test_matrix_csv(tmpdir):
    m = FeatureMatrix([[70., 1.0000000000000002], [1. / 3., 2.5]], ['heart_rate', 'accel_mag'],
                      row_keys=[('007', 1000), ('007', 1001)])
    fpath = tmpdir.join('m.csv')
    fpath.write(m.to_csv())

    assert fpath.read().splitlines()[0] == 'subject_id,second_ts,heart_rate,accel_mag'

    m2 = read_matrix(str(fpath))
    assert_array_equal(m2.values, m.values)
    assert m2.row_keys == [('007', 1000), ('007', 1001)]


def test_matrix_csv_invalid(tmpdir):
    fpath = tmpdir.join('m.csv')
    fpath.write('second_ts,subject_id,a\n1,S,2\n')
    with pytest.raises(DataError):
        read_matrix(str(fpath))
    with pytest.raises(DataError):
        read_matrix(str(tmpdir.join('missing.csv')))


def test_matrix_concat():
    a = FeatureMatrix([[1., 2.]], ['x', 'y'], row_keys=[('A', 1)], attrs=dict(dropped_seconds=2))
    b = FeatureMatrix([[3., 4.], [5., 6.]], ['x', 'y'], row_keys=[('B', 1), ('B', 2)],
                      attrs=dict(dropped_seconds=1))
    m = FeatureMatrix.concat([a, b])
    assert m.shape == (3, 2)
    assert m.subjects == ['A', 'B']
    assert m.attrs['dropped_seconds'] == 3
    assert_array_equal(m.for_subject('B').values, [[3., 4.], [5., 6.]])

    with pytest.raises(DataError):
        FeatureMatrix.concat([a, FeatureMatrix([[1.]], ['x'])])


### CHECK ALIGNMENT

def test_align_constant_magnitude():
    block = _generate_block([(0, 70.)], [(125 * i, (1., 0., 0.)) for i in range(8)])
    m = align_features(block, 'hr_accel_mag')
    assert_array_equal(m.values, [[70., 1.]])
    assert m.column_names == ['heart_rate', 'accel_mag']
    assert m.row_keys == [('S01', 0)]
    assert m.attrs['dropped_seconds'] == 0


def test_align_drop_count():
    block = _generate_block([(0, 70.), (1000, 72.)], [(125 * i, (0., 0., 1.)) for i in range(8)])
    m = align_features(block)
    assert m.n == 1
    assert m.attrs['dropped_seconds'] == 1


def test_align_xyz_means():
    block = _generate_block([(0, 80.), (1000, 90.)],
                            [(0, (1., 2., 3.)), (500, (3., 4., 5.)), (1000, (0., 0., 1.))])
    m = align_features(block, 'hr_accel_xyz')
    assert m.column_names == ['heart_rate', 'accel_x', 'accel_y', 'accel_z']
    assert_array_equal(m.values, [[80., 2., 3., 4.], [90., 0., 0., 1.]])


def test_align_heart_rate_mean():
    block = _generate_block([(0, 70.), (500, 80.)], [(0, (0., 0., 2.))])
    m = align_features(block)
    assert_array_equal(m.values, [[75., 2.]])


def test_align_full_block():
    streams = gen_sensor_streams(ActivitySchedule([(180, 'rest')]), seed=0)
    block = RecordingBlock('S01', 0, 180000, streams)
    m = align_features(block)
    assert m.n == 180
    assert np.all(np.isfinite(m.values))


def test_align_errors():
    hr_only = RecordingBlock('S01', 0, 180000, {'HeartRate': SensorStream(HEART_RATE, [0], [70.])})
    with pytest.raises(DataError):
        align_features(hr_only)

    no_overlap = _generate_block([(0, 70.)], [(1000, (0., 0., 1.))])
    with pytest.raises(DataError):
        align_features(no_overlap)

    block = _generate_block([(0, 70.)], [(0, (0., 0., 1.))])
    with pytest.raises(UsageError):
        align_features(block, 'hr_gsr')


def test_align_blocks_skips_invalid():
    streams = gen_sensor_streams(ActivitySchedule.mixed(1080), seed=0, recording=(180000, 180000))
    blocks = list(segment_blocks(streams.values(), subject_id='S01'))
    blocks.append(RecordingBlock('S01', 1080000, 180000,
                                 {'HeartRate': SensorStream(HEART_RATE, [1080000], [70.])}))

    m = align_blocks(blocks)
    assert m.n == 3 * 180
    assert m.attrs['blocks'] == 3
    assert m.attrs['skipped_blocks'] == 1
    assert m.subjects == ['S01']

    with pytest.raises(DataError):
        align_blocks(blocks[-1:])


### CHECK STANDARDIZATION

def test_standardize_hand_example():
    m = standardize(FeatureMatrix([[2.], [4.], [6.]], ['a']))
    assert_allclose(m.values[:, 0], [-1., 0., 1.], atol=1e-12)
    assert_allclose(m.standardization[0], [4.])
    assert_allclose(m.standardization[1], [2.])


def test_standardize_constant_column():
    m = standardize(FeatureMatrix([[5., 1.], [5., 2.], [5., 4.]], ['a', 'b']))
    assert_array_equal(m.values[:, 0], [0., 0., 0.])
    assert m.standardization[1][0] == 0.
    assert_allclose(inverse_transform(m).values[:, 0], [5., 5., 5.])


def test_standardize_moments():
    m = standardize(_generate_random_matrix(seed=1))
    assert_allclose(m.values.mean(axis=0), 0., atol=1e-12)
    assert_allclose(m.values.std(axis=0, ddof=1), 1., atol=1e-12)


def test_standardize_idempotent():
    m = standardize(_generate_random_matrix(seed=2))
    m2 = standardize(m)
    assert_allclose(m2.values, m.values, atol=1e-12)


def test_standardize_inverse():
    m = _generate_random_matrix(seed=3)
    assert_allclose(inverse_transform(standardize(m)).values, m.values, atol=1e-9)
    assert_allclose(inverse_transform(standardize(standardize(m))).values, m.values, atol=1e-9)


def test_standardize_errors():
    with pytest.raises(DataError):
        standardize(FeatureMatrix([[1., 2.]], ['a', 'b']))
    with pytest.raises(DataError):
        inverse_transform(_generate_matrix())


### CHECK WHITENING

def test_whiten_identity_covariance():
    m = whiten(_generate_random_matrix(seed=4, correlated=True))
    assert_allclose(np.cov(m.values, rowvar=False), np.eye(3), atol=1e-10)
    assert m.column_names == ['a_w', 'b_w', 'c_w']
    assert m.attrs['whitened']


def test_whiten_mahalanobis():
    m = _generate_random_matrix(seed=5, correlated=True)
    X = m.values
    VI = np.linalg.inv(np.cov(X, rowvar=False))
    diff = X[0] - X[1]

    Z = whiten(m).values
    assert_allclose(np.sum((Z[0] - Z[1])**2.), diff.dot(VI).dot(diff), rtol=1e-10)


def test_whiten_singular():
    with pytest.raises(NumericalError):
        whiten(FeatureMatrix([[1., 2.], [2., 4.], [3., 6.]], ['a', 'b']))


### STANDARD TEST OBJECTS

def _generate_matrix():
    return FeatureMatrix(np.arange(15.).reshape(5, 3), ['a', 'b', 'c'])


def _generate_random_matrix(seed=0, correlated=False):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 3)) * [10., 1., .1] + [70., 1., -3.]
    if correlated:
        X = X.dot([[1., .5, .2], [0., 1., .3], [0., 0., 1.]])
    return FeatureMatrix(X, ['a', 'b', 'c'])


def _generate_block(hr, accel):
    streams = {'HeartRate': SensorStream(HEART_RATE, [t for t, _ in hr], [v for _, v in hr]),
               'Accelerometer': SensorStream(ACCELEROMETER, [t for t, _ in accel],
                                             [v for _, v in accel])}
    return RecordingBlock('S01', 0, 180000, streams)
