'''Per-second feature matrices aligned from multi-rate streams'''

import io
import logging
import numpy as np
import pandas as pd
import xarray as xr
import scipy.linalg

from .errors import DataError, NumericalError, UsageError
from .streams import HEART_RATE, ACCELEROMETER


RECIPES = {
    'hr_accel_mag': ('heart_rate', 'accel_mag'),
    'hr_accel_xyz': ('heart_rate', 'accel_x', 'accel_y', 'accel_z'),
}
DEFAULT_RECIPE = 'hr_accel_mag'
KEY_COLUMNS = ('subject_id', 'second_ts')
FLOAT_FORMAT = '%.17g'

# initialize logger
logger = logging.getLogger(__name__)


class FeatureMatrix:
    '''Observations by features with subject and second keys

    The matrix is stored as an :class:`xarray.DataArray` with
    dimensions ``observation`` and ``feature``. Each observation
    carries a ``subject_id`` and ``second_ts`` (whole seconds since
    epoch) coordinate.

    Parameters
    ----------
    values : array-like
        Matrix of shape n x d
    column_names : iterable of str
        Unique feature names
    row_keys : iterable of 2-tuples, optional
        Pairs of subject identifier and second timestamp per row
        (default: empty subject and row numbers)
    standardization : 2-tuple of numpy.ndarray, optional
        Column means and standard deviations that were removed from
        the values
    attrs : dict, optional
        Additional attributes, like the number of dropped seconds

    Raises
    ------
    DataError
        If the matrix is empty, holds non-finite values or the column
        names are not unique

    '''


    def __init__(self, values, column_names, row_keys=None,
                 standardization=None, attrs=None):

        values = np.asarray(values, dtype=float)
        column_names = [str(c) for c in column_names]

        if values.ndim != 2:
            raise DataError('Feature matrix must be two-dimensional, got shape %s' % (values.shape,))
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise DataError('Feature matrix is empty: shape %s' % (values.shape,))
        if values.shape[1] != len(column_names):
            raise DataError('Got %d column names for %d columns' % (len(column_names),
                                                                    values.shape[1]))
        if len(set(column_names)) != len(column_names):
            raise DataError('Column names are not unique: %s' % ', '.join(column_names))
        if not np.all(np.isfinite(values)):
            raise DataError('Feature matrix contains non-finite values')

        if row_keys is None:
            row_keys = [('', i) for i in range(values.shape[0])]
        row_keys = list(row_keys)
        if len(row_keys) != values.shape[0]:
            raise DataError('Got %d row keys for %d rows' % (len(row_keys), values.shape[0]))

        subjects, seconds = zip(*row_keys)
        self.data = xr.DataArray(values,
                                 dims=('observation', 'feature'),
                                 coords=dict(feature=column_names,
                                             subject_id=('observation', np.asarray(subjects, dtype=object)),
                                             second_ts=('observation', np.asarray(seconds, dtype=np.int64))),
                                 attrs=dict(attrs or {}))

        if standardization is not None:
            mean, std = standardization
            standardization = (np.asarray(mean, dtype=float), np.asarray(std, dtype=float))
        self.standardization = standardization


    def __len__(self):

        return self.data.shape[0]


    def __repr__(self):

        return 'FeatureMatrix(%d x %d: %s)' % (self.n, self.d, ', '.join(self.column_names))


    @property
    def values(self):

        return self.data.values


    @property
    def shape(self):

        return self.data.shape


    @property
    def n(self):

        return self.data.shape[0]


    @property
    def d(self):

        return self.data.shape[1]


    @property
    def column_names(self):

        return [str(c) for c in self.data.coords['feature'].values]


    @property
    def row_keys(self):

        return list(zip(self.data.coords['subject_id'].values,
                        [int(s) for s in self.data.coords['second_ts'].values]))


    @property
    def subjects(self):
        '''Unique subject identifiers in order of appearance'''

        return list(pd.unique(self.data.coords['subject_id'].values))


    @property
    def attrs(self):

        return self.data.attrs


    def column(self, name):

        return self.data.sel(feature=name).values


    def reinitialize(self, values=None, column_names=None, standardization=None, **attrs):
        '''Return new matrix with the same row keys and modified content'''

        settings = dict(self.attrs)
        settings.update(attrs)
        return FeatureMatrix(self.values if values is None else values,
                             self.column_names if column_names is None else column_names,
                             row_keys=self.row_keys,
                             standardization=standardization,
                             attrs=settings)


    def select(self, rows):
        '''Return matrix with a subset of rows'''

        rows = np.arange(self.n)[rows]
        keys = self.row_keys
        return FeatureMatrix(self.values[rows], self.column_names,
                             row_keys=[keys[i] for i in rows],
                             standardization=self.standardization,
                             attrs=self.attrs)


    def for_subject(self, subject_id):

        return self.select(self.data.coords['subject_id'].values == subject_id)


    @classmethod
    def concat(cls, matrices):
        '''Pool matrices with identical columns into one matrix

        Dropped second counts are summed. Standardization records are
        not carried over, since they differ per matrix.

        '''

        matrices = list(matrices)
        if not matrices:
            raise DataError('Nothing to concatenate')

        columns = matrices[0].column_names
        for m in matrices[1:]:
            if m.column_names != columns:
                raise DataError('Column mismatch: %s vs %s' % (m.column_names, columns))

        return cls(np.concatenate([m.values for m in matrices], axis=0),
                   columns,
                   row_keys=[k for m in matrices for k in m.row_keys],
                   attrs=dict(dropped_seconds=sum(m.attrs.get('dropped_seconds', 0)
                                                  for m in matrices)))


    def to_dataframe(self):

        df = pd.DataFrame(self.values, columns=self.column_names)
        df.insert(0, 'second_ts', self.data.coords['second_ts'].values)
        df.insert(0, 'subject_id', self.data.coords['subject_id'].values)
        return df


    def to_csv(self):
        '''Format matrix as CSV with key columns and 17 significant digits'''

        fp = io.StringIO()
        self.to_dataframe().to_csv(fp, index=False, float_format=FLOAT_FORMAT)
        return fp.getvalue()


def read_matrix(fpath):
    '''Read a feature matrix CSV file written by :meth:`FeatureMatrix.to_csv`

    Raises
    ------
    DataError
        If the key columns are missing or the file holds no features

    '''

    try:
        df = pd.read_csv(fpath, dtype={'subject_id': str}, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError('Cannot read feature matrix %s: %s' % (fpath, e))

    if tuple(df.columns[:2]) != KEY_COLUMNS:
        raise DataError('%s: expected key columns %s' % (fpath, ', '.join(KEY_COLUMNS)))

    columns = list(df.columns[2:])
    try:
        values = df[columns].to_numpy(dtype=float)
    except ValueError as e:
        raise DataError('%s: non-numeric feature value (%s)' % (fpath, e))

    return FeatureMatrix(values, columns,
                         row_keys=zip(df['subject_id'], df['second_ts'].astype(np.int64)))


def align_features(block, recipe=DEFAULT_RECIPE):
    '''Align heart rate and acceleration of a block per whole second

    Each second with at least one heart rate sample and at least one
    accelerometer sample becomes a row. Heart rates and accelerations
    are averaged within the second; ``hr_accel_mag`` averages the
    acceleration magnitude, ``hr_accel_xyz`` averages each axis.
    Seconds missing either modality are dropped and counted in the
    ``dropped_seconds`` attribute.

    Parameters
    ----------
    block : RecordingBlock
        Block holding heart rate and accelerometer streams
    recipe : str, optional
        Feature recipe (default: hr_accel_mag)

    Returns
    -------
    FeatureMatrix
        Aligned per-second features

    Raises
    ------
    DataError
        If the block lacks heart rate or accelerometer samples or no
        second has both
    UsageError
        If the recipe is unknown

    '''

    if recipe not in RECIPES:
        raise UsageError('Unknown feature recipe: %s' % recipe)

    for modality in (HEART_RATE, ACCELEROMETER):
        if not block.has_modality(modality):
            raise DataError('Block at %d of subject "%s" has no %s samples' % (block.start,
                                                                               block.subject_id,
                                                                               modality.name))

    hr = block.streams[HEART_RATE.name]
    acc = block.streams[ACCELEROMETER.name]

    hr = pd.DataFrame({'heart_rate': hr.values[:, 0]},
                      index=pd.Index(hr.timestamps // 1000, name='second'))
    if recipe == 'hr_accel_mag':
        acc = pd.DataFrame({'accel_mag': np.sqrt(np.sum(acc.values**2., axis=1))},
                           index=pd.Index(acc.timestamps // 1000, name='second'))
    else:
        acc = pd.DataFrame(acc.values, columns=['accel_x', 'accel_y', 'accel_z'],
                           index=pd.Index(acc.timestamps // 1000, name='second'))

    hr = hr.groupby(level='second').mean()
    acc = acc.groupby(level='second').mean()

    joined = hr.join(acc, how='inner')
    dropped = len(hr.index.union(acc.index)) - len(joined)

    if dropped > 0:
        logger.warning('Dropped %d seconds of block at %d missing a modality', dropped, block.start)
    if len(joined) == 0:
        raise DataError('Block at %d of subject "%s" has no second with both modalities' % (
            block.start, block.subject_id))

    return FeatureMatrix(joined[list(RECIPES[recipe])].values,
                         RECIPES[recipe],
                         row_keys=[(block.subject_id, int(s)) for s in joined.index],
                         attrs=dict(dropped_seconds=int(dropped), recipe=recipe))


def align_blocks(blocks, recipe=DEFAULT_RECIPE):
    '''Align all blocks of a subject into one matrix

    Blocks that cannot be aligned are skipped with a warning.

    Raises
    ------
    DataError
        If no block could be aligned

    '''

    matrices = []
    skipped = 0
    for block in blocks:
        try:
            matrices.append(align_features(block, recipe=recipe))
        except DataError as e:
            logger.warning('Skipped block: %s', e)
            skipped += 1

    if not matrices:
        raise DataError('No valid blocks to align')

    m = FeatureMatrix.concat(matrices)
    m.attrs.update(recipe=recipe, blocks=len(matrices), skipped_blocks=skipped)
    return m


def standardize(m):
    '''Scale columns to zero mean and unit sample standard deviation

    Constant columns become zero and get a recorded standard
    deviation of zero. Standardizing an already standardized matrix
    composes both transforms, so :func:`inverse_transform` always
    returns to the original scale.

    Parameters
    ----------
    m : FeatureMatrix
        Matrix with at least two rows

    Returns
    -------
    FeatureMatrix
        Standardized matrix with its (mean, std) record

    Raises
    ------
    DataError
        If the matrix has fewer than two rows

    '''

    if m.n < 2:
        raise DataError('Standardization needs at least 2 rows, got %d' % m.n)

    X = m.values
    mean = X.mean(axis=0)
    std = X.std(axis=0, ddof=1)

    constant = np.ptp(X, axis=0) == 0
    std[constant] = 0.

    Z = np.zeros(X.shape)
    Z[:, ~constant] = (X[:, ~constant] - mean[~constant]) / std[~constant]

    if constant.any():
        logger.info('Constant columns: %s', ', '.join(np.asarray(m.column_names)[constant]))

    if m.standardization is not None:
        mean0, std0 = m.standardization
        mean = mean0 + std0 * mean
        std = std0 * std

    return m.reinitialize(values=Z, standardization=(mean, std))


def inverse_transform(m):
    '''Undo the standardization recorded in a matrix

    Raises
    ------
    DataError
        If the matrix is not standardized

    '''

    if m.standardization is None:
        raise DataError('Matrix is not standardized')

    mean, std = m.standardization
    return m.reinitialize(values=m.values * std + mean, standardization=None)


def whiten(m):
    '''Decorrelate features with the Cholesky factor of their covariance

    Squared Euclidean distances between whitened rows equal squared
    Mahalanobis distances between the original rows, so the k-means
    squared Euclidean objective turns into a Mahalanobis objective.

    Raises
    ------
    DataError
        If the matrix has fewer than two rows
    NumericalError
        If the sample covariance is singular

    '''

    if m.n < 2:
        raise DataError('Whitening needs at least 2 rows, got %d' % m.n)

    X = m.values
    cov = np.atleast_2d(np.cov(X, rowvar=False))
    try:
        L = scipy.linalg.cholesky(cov, lower=True)
    except np.linalg.LinAlgError:
        raise NumericalError('Sample covariance is singular, cannot whiten')

    Z = scipy.linalg.solve_triangular(L, (X - X.mean(axis=0)).T, lower=True).T

    return m.reinitialize(values=Z,
                          column_names=['%s_w' % c for c in m.column_names],
                          whitened=True)


def as_values(m):
    '''Return the values of a feature matrix or array-like as a 2-d array'''

    if isinstance(m, FeatureMatrix):
        return m.values
    return np.atleast_2d(np.asarray(m, dtype=float))


def row_keys_of(m):
    '''Return the row keys of a feature matrix, or None for plain arrays'''

    if isinstance(m, FeatureMatrix):
        return m.row_keys
    return None
