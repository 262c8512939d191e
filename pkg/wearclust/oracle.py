'''Exact reference solutions and partition agreement

:func:`bruteforce_kmeans` finds the global minimum of the k-means
objective by enumerating every partition of a small data set and is
used to check the heuristic fits.

'''

import numpy as np
from sklearn import metrics

from .errors import DataError
from .features import as_values


MAX_ENUMERATION = 10


def set_partitions(n, k):
    '''Partitions of ``range(n)`` into exactly k non-empty blocks

    Partitions are generated as restricted growth strings: element 0
    is in block 0 and every element joins an existing block or opens
    the next one.

    Yields
    ------
    numpy.ndarray
        Block index per element

    '''

    labels = np.zeros(n, dtype=int)

    def grow(i, used):
        if n - i < k - used:
            return
        if i == n:
            if used == k:
                yield labels.copy()
            return
        for block in range(min(used + 1, k)):
            labels[i] = block
            yield from grow(i + 1, max(used, block + 1))

    if 1 <= k <= n:
        labels[0] = 0
        yield from grow(1, 1)


def bruteforce_kmeans(m, k):
    '''Globally optimal k-means partition by exhaustive enumeration

    Parameters
    ----------
    m : FeatureMatrix or array-like
        Data, at most 10 rows
    k : int
        Number of clusters, at most the number of rows

    Returns
    -------
    float
        Minimal objective J (sum of squared distances to group means)
    list of tuples
        Row indices per group of the optimal partition, ordered by
        their first row

    Raises
    ------
    DataError
        If the data has more than 10 rows or fewer rows than k

    '''

    X = as_values(m)
    n = len(X)

    if n > MAX_ENUMERATION:
        raise DataError('Exhaustive k-means is limited to %d rows, got %d' % (MAX_ENUMERATION, n))
    if not 1 <= k <= n:
        raise DataError('Need 1 <= k <= n, got k=%d for n=%d' % (k, n))

    best_J, best = np.inf, None
    for labels in set_partitions(n, k):
        J = 0.
        for block in range(k):
            rows = X[labels == block]
            J += np.sum((rows - rows.mean(axis=0))**2.)
        if J < best_J:
            best_J, best = J, labels

    partition = [tuple(np.flatnonzero(best == block).tolist()) for block in range(k)]

    return float(best_J), partition


def adjusted_rand_index(a, b):
    '''Adjusted Rand index between two labelings

    Raises
    ------
    DataError
        If the labelings differ in length

    '''

    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    if len(a) != len(b):
        raise DataError('Labelings differ in length: %d and %d' % (len(a), len(b)))

    return float(metrics.adjusted_rand_score(a, b))
