'''Pearson correlation, histograms and scatter pairs of feature columns'''

import io
import json
import logging
import itertools
import numpy as np
import pandas as pd
import scipy.stats

from .errors import DataError


DEFAULT_BINS = 10

# initialize logger
logger = logging.getLogger(__name__)


def is_constant(x):
    '''True if all values of a series are equal'''

    return np.ptp(np.asarray(x, dtype=float)) == 0


def pearson(x, y):
    '''Pearson product-moment correlation coefficient

    Computed in two passes (means first) to avoid cancellation on
    series with large offsets, like epoch timestamps. The deviations
    are scaled to unit maximum so tiny magnitudes do not underflow.

    Parameters
    ----------
    x : array-like
        First series
    y : array-like
        Second series of the same length

    Returns
    -------
    r : float
        Correlation coefficient in [-1, 1]

    Raises
    ------
    DataError
        If the lengths differ, there are fewer than two values or one
        of the series is constant

    '''

    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)

    if len(x) != len(y):
        raise DataError('Length mismatch: %d vs %d' % (len(x), len(y)))
    if len(x) < 2:
        raise DataError('Correlation needs at least 2 values, got %d' % len(x))

    if is_constant(x) or is_constant(y):
        raise DataError('Correlation is undefined for a constant series')

    dx = x - x.mean()
    dy = y - y.mean()
    dx /= np.max(np.abs(dx))
    dy /= np.max(np.abs(dy))

    r = np.sum(dx * dy) / np.sqrt(np.sum(dx * dx) * np.sum(dy * dy))

    return float(np.clip(r, -1., 1.))


class ScatterPair:
    '''Points of two feature columns with their reference lines

    Attributes
    ----------
    x, y : str
        Column names
    points : numpy.ndarray
        Array of shape n x 2
    slope, intercept : float
        Least-squares line of y on x in the original units (NaN if
        undefined)
    standardized_slope : float
        Slope of the least-squares line between the standardized
        columns, which equals the Pearson coefficient

    '''


    def __init__(self, x, y, points):

        self.x = x
        self.y = y
        self.points = np.asarray(points, dtype=float)

        self.slope = np.nan
        self.intercept = np.nan
        self.standardized_slope = np.nan

        if not is_constant(self.points[:, 0]):
            with np.errstate(divide='ignore', invalid='ignore', under='ignore'):
                fit = scipy.stats.linregress(self.points[:, 0], self.points[:, 1])
            self.slope = float(fit.slope)
            self.intercept = float(fit.intercept)
            if not is_constant(self.points[:, 1]):
                self.standardized_slope = pearson(self.points[:, 0], self.points[:, 1])


    def to_csv(self):

        fp = io.StringIO()
        pd.DataFrame(self.points, columns=[self.x, self.y]).to_csv(fp, index=False,
                                                                 float_format='%.17g')
        return fp.getvalue()


class CorrelationReport:
    '''Pairwise correlations, per-variable histograms and scatter pairs

    Attributes
    ----------
    variables : list of str
        Variable names
    r : numpy.ndarray
        Symmetric d x d Pearson matrix with unit diagonal; entries
        involving a constant variable are NaN
    undefined : numpy.ndarray
        Boolean d x d mask of undefined entries
    histograms : dict
        Mapping of variable names to (bin edges, counts)
    pairs : list of ScatterPair
        One pair per off-diagonal variable combination

    '''


    def __init__(self, variables, r, undefined, histograms, pairs):

        self.variables = list(variables)
        self.r = r
        self.undefined = undefined
        self.histograms = histograms
        self.pairs = pairs


    def coefficient(self, a, b):

        return self.r[self.variables.index(a), self.variables.index(b)]


    def to_dict(self):

        def nullable(v):
            return None if np.isnan(v) else float(v)

        return dict(variables=self.variables,
                    r=[[nullable(v) for v in row] for row in self.r],
                    undefined=self.undefined.tolist(),
                    histograms={k: dict(edges=e.tolist(), counts=c.tolist())
                                for k, (e, c) in self.histograms.items()},
                    pairs=[dict(x=p.x, y=p.y, n=len(p.points),
                                slope=nullable(p.slope),
                                intercept=nullable(p.intercept),
                                standardized_slope=nullable(p.standardized_slope))
                           for p in self.pairs])


    def to_json(self):

        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def correlation_report(m, bins=DEFAULT_BINS):
    '''Correlate all columns of a feature matrix

    Parameters
    ----------
    m : FeatureMatrix
        Matrix with at least two rows and two columns
    bins : int, optional
        Number of uniform histogram bins between each column's minimum
        and maximum (default: 10)

    Returns
    -------
    CorrelationReport
        Correlation matrix, histograms and scatter pairs

    Raises
    ------
    DataError
        If the matrix has fewer than two rows or columns

    '''

    if m.n < 2:
        raise DataError('Correlation needs at least 2 rows, got %d' % m.n)
    if m.d < 2:
        raise DataError('Correlation needs at least 2 columns, got %d' % m.d)

    X = m.values
    names = m.column_names
    d = m.d

    r = np.eye(d)
    undefined = np.zeros((d, d), dtype=bool)
    constant = np.array([is_constant(X[:, i]) for i in range(d)])

    for i, j in itertools.combinations(range(d), 2):
        if constant[i] or constant[j]:
            r[i, j] = r[j, i] = np.nan
            undefined[i, j] = undefined[j, i] = True
        else:
            r[i, j] = r[j, i] = pearson(X[:, i], X[:, j])

    if constant.any():
        logger.warning('Correlation undefined for constant columns: %s',
                       ', '.join(np.asarray(names)[constant]))

    histograms = {}
    for i, name in enumerate(names):
        counts, edges = np.histogram(X[:, i], bins=bins)
        histograms[name] = (edges, counts)

    pairs = [ScatterPair(names[i], names[j], X[:, [i, j]])
             for i, j in itertools.combinations(range(d), 2)]

    return CorrelationReport(names, r, undefined, histograms, pairs)
