'''k-means clustering with k-means++ seeding and replicate restarts

Minimizes the within-cluster distance sum

    J = sum_k sum_{i in c_k} dist(x_i, m_k)

by Lloyd iteration. Squared Euclidean distance gives the classical
squared error objective; cosine distance gives spherical k-means.
Mahalanobis distance is obtained by clustering
:func:`wearclust.features.whiten` output with squared Euclidean
distance.

'''

import json
import logging
import dataclasses
import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError, NumericalError, UsageError
from .features import as_values, row_keys_of
from .assignment import Assignment


DISTANCES = {'squared_euclidean': 'sqeuclidean',
             'cosine': 'cosine'}
INITS = ('kmeanspp', 'preliminary_subsample', 'explicit')

# initialize logger
logger = logging.getLogger(__name__)


@dataclasses.dataclass
class KMeansConfig:
    '''Configuration of a k-means fit

    Parameters
    ----------
    k : int
        Number of clusters
    distance : str
        ``squared_euclidean`` (default) or ``cosine``
    replicates : int
        Number of independently seeded restarts (default: 5)
    max_iter : int
        Maximum number of Lloyd iterations (default: 100)
    tol : float
        Relative improvement of J below which iteration stops
        (default: 1e-9)
    init : str
        ``kmeanspp`` (default), ``preliminary_subsample`` or
        ``explicit``
    subsample_fraction : float
        Fraction of rows used by the preliminary phase (default: 0.1)
    seed : int
        Base seed; replicate r uses ``seed + r``
    centroids : list, optional
        Initial centroids for ``explicit`` initialization

    '''

    k: int
    distance: str = 'squared_euclidean'
    replicates: int = 5
    max_iter: int = 100
    tol: float = 1e-9
    init: str = 'kmeanspp'
    subsample_fraction: float = 0.1
    seed: int = 0
    centroids: list = None


    def validate(self, n=None):
        '''Check the configuration, optionally against the number of rows

        Raises
        ------
        UsageError

        '''

        if int(self.k) != self.k or self.k < 1:
            raise UsageError('k must be a positive integer, got %s' % self.k)
        if self.distance not in DISTANCES:
            raise UsageError('Unknown distance: %s' % self.distance)
        if self.replicates < 1:
            raise UsageError('Number of replicates must be positive, got %s' % self.replicates)
        if self.max_iter < 1:
            raise UsageError('max_iter must be positive, got %s' % self.max_iter)
        if self.tol < 0:
            raise UsageError('Tolerance must be non-negative, got %s' % self.tol)
        if self.init not in INITS:
            raise UsageError('Unknown initialization: %s' % self.init)
        if not 0 < self.subsample_fraction <= 1:
            raise UsageError('Subsample fraction must be in (0, 1], got %s' % self.subsample_fraction)
        if int(self.seed) != self.seed or self.seed < 0:
            raise UsageError('Seed must be a non-negative integer, got %s' % self.seed)
        if self.init == 'explicit':
            if self.centroids is None or len(self.centroids) != self.k:
                raise UsageError('Explicit initialization needs %d centroids' % self.k)
        if n is not None and self.k > n:
            raise UsageError('k = %d exceeds the number of rows (%d)' % (self.k, n))


    def to_dict(self):

        settings = dataclasses.asdict(self)
        if self.centroids is not None:
            settings['centroids'] = np.asarray(self.centroids, dtype=float).tolist()
        return settings


@dataclasses.dataclass(frozen=True)
class KMeansModel:
    '''Fitted k-means model

    Attributes
    ----------
    centroids : numpy.ndarray
        Cluster centers, K x d
    labels : numpy.ndarray
        Cluster index per training row
    objective : float
        Final value of J
    iterations : int
        Number of centroid updates
    replicate_chosen : int
        Index of the winning replicate
    history : tuple of float
        J after every assignment step
    config : KMeansConfig
        Configuration of the fit

    '''

    centroids: np.ndarray
    labels: np.ndarray
    objective: float
    iterations: int
    replicate_chosen: int
    history: tuple
    config: KMeansConfig


    def __post_init__(self):

        self.centroids.setflags(write=False)
        self.labels.setflags(write=False)


    @property
    def k(self):

        return self.centroids.shape[0]


    def to_dict(self):

        return dict(model='kmeans',
                    centroids=self.centroids.tolist(),
                    objective=self.objective,
                    iterations=self.iterations,
                    replicate_chosen=self.replicate_chosen,
                    seed=self.config.seed,
                    config=self.config.to_dict())


    def to_json(self):

        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def pairwise_distance(X, C, distance='squared_euclidean'):
    '''Distance table between rows and centroids

    Returns
    -------
    D : numpy.ndarray
        Array of shape n x K

    Raises
    ------
    NumericalError
        If a distance is undefined, like the cosine distance to a
        zero vector

    '''

    D = cdist(X, C, DISTANCES[distance])
    if not np.all(np.isfinite(D)):
        raise NumericalError('Undefined %s distance, zero vectors?' % distance)
    return D


def objective(X, C, labels, distance='squared_euclidean'):
    '''Within-cluster distance sum J'''

    X = as_values(X)
    D = pairwise_distance(X, C, distance)
    return float(np.sum(D[np.arange(len(X)), labels]))


def kmeanspp_init(m, k, rng, distance='squared_euclidean'):
    '''Choose k seed centroids with the k-means++ heuristic

    The first centroid is a uniformly drawn row. Each next centroid
    is a row drawn with probability proportional to its squared
    distance to the nearest centroid chosen so far.

    Parameters
    ----------
    m : FeatureMatrix or array-like
        Data, n x d
    k : int
        Number of centroids
    rng : numpy.random.Generator
        Seeded generator
    distance : str, optional
        Distance used for the weights (default: squared_euclidean)

    Returns
    -------
    numpy.ndarray
        Centroids, k x d

    Raises
    ------
    DataError
        If k exceeds the number of distinct rows

    '''

    X = as_values(m)
    n = len(X)

    distinct = len(np.unique(X, axis=0))
    if k < 1 or k > distinct:
        raise DataError('Cannot seed %d centroids from %d distinct rows' % (k, distinct))

    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]

    nearest = pairwise_distance(X, centroids[:1], distance)[:, 0]
    for i in range(1, k):

        weights = nearest if distance == 'squared_euclidean' else nearest**2.
        total = np.sum(weights)
        if total <= 0:
            raise DataError('Cannot seed %d centroids, all rows coincide with chosen seeds' % k)

        centroids[i] = X[rng.choice(n, p=weights / total)]
        nearest = np.minimum(nearest, pairwise_distance(X, centroids[i:i+1], distance)[:, 0])

    return centroids


def preliminary_phase(m, cfg, rng):
    '''Initial centroids from a k-means fit on a random subsample

    Draws ``ceil(subsample_fraction * n)`` rows without replacement,
    runs a k-means++ seeded Lloyd fit on them and returns its
    centroids. A fraction covering all rows uses the data as is.

    Raises
    ------
    DataError
        If the subsample has fewer rows than clusters

    '''

    X = as_values(m)
    n = len(X)

    size = int(np.ceil(round(cfg.subsample_fraction * n, 9)))
    if size < cfg.k:
        raise DataError('Subsample of %d rows is smaller than k = %d' % (size, cfg.k))

    if size >= n:
        rows = np.arange(n)
    else:
        rows = np.sort(rng.choice(n, size=size, replace=False))

    logger.debug('Preliminary clustering on %d of %d rows', size, n)

    sub = X[rows]
    init = kmeanspp_init(sub, cfg.k, rng, distance=cfg.distance)
    return lloyd(sub, init, cfg).centroids.copy()


def _assign(X, C, distance):
    '''Nearest-centroid assignment with empty-cluster repair

    Ties go to the lowest cluster index. An empty cluster seizes the
    point farthest from its centroid among clusters with more than one
    member, and is centered on it.

    '''

    k = len(C)
    D = pairwise_distance(X, C, distance)
    labels = np.argmin(D, axis=1)
    counts = np.bincount(labels, minlength=k)

    for j in np.flatnonzero(counts == 0):
        current = D[np.arange(len(X)), labels]
        movable = np.flatnonzero(counts[labels] > 1)
        i = movable[np.argmax(current[movable])]

        logger.warning('Cluster %d is empty, seizing row %d', j, i)

        counts[labels[i]] -= 1
        counts[j] = 1
        labels[i] = j
        C[j] = X[i]
        D[:, j] = pairwise_distance(X, C[j:j+1], distance)[:, 0]

    return labels, C, D


def _update(X, labels, C, distance):

    C = C.copy()
    for j in range(len(C)):
        members = X[labels == j]
        if distance == 'cosine':
            members = members / np.linalg.norm(members, axis=1, keepdims=True)
            center = members.mean(axis=0)
            C[j] = center / np.linalg.norm(center)
        else:
            C[j] = members.mean(axis=0)

    return C


def lloyd(m, init, cfg):
    '''Lloyd iteration from given initial centroids

    Alternates nearest-centroid assignment and centroid update until
    the relative improvement of J drops below ``cfg.tol`` or
    ``cfg.max_iter`` updates are done. Centroids are cluster means for
    squared Euclidean distance and normalized mean directions for
    cosine distance.

    Parameters
    ----------
    m : FeatureMatrix or array-like
        Data, n x d
    init : array-like
        Distinct initial centroids, K x d
    cfg : KMeansConfig
        Configuration; ``distance``, ``max_iter`` and ``tol`` are used

    Returns
    -------
    KMeansModel
        Fitted model

    Raises
    ------
    DataError
        On non-finite input, duplicate initial centroids or a
        dimension mismatch

    '''

    X = as_values(m)
    C = np.array(init, dtype=float, ndmin=2)

    if not np.all(np.isfinite(X)):
        raise DataError('Data contains non-finite values')
    if C.shape[1] != X.shape[1]:
        raise DataError('Centroids have %d columns, data has %d' % (C.shape[1], X.shape[1]))
    if len(np.unique(C, axis=0)) < len(C):
        raise DataError('Initial centroids are not distinct')
    if len(C) > len(X):
        raise DataError('More centroids (%d) than rows (%d)' % (len(C), len(X)))

    labels, C, D = _assign(X, C, cfg.distance)
    J = float(np.sum(D[np.arange(len(X)), labels]))

    history = [J]
    iterations = 0
    for _ in range(cfg.max_iter):

        C_new = _update(X, labels, C, cfg.distance)
        labels_new, C_new, D = _assign(X, C_new, cfg.distance)
        J_new = float(np.sum(D[np.arange(len(X)), labels_new]))

        iterations += 1
        history.append(J_new)

        converged = J == 0 or J - J_new < cfg.tol * J
        C, labels, J = C_new, labels_new, J_new

        if converged:
            break
    else:
        logger.warning('Lloyd iteration stopped after %d iterations without converging', iterations)

    return KMeansModel(centroids=C, labels=labels, objective=J,
                       iterations=iterations, replicate_chosen=0,
                       history=tuple(history), config=cfg)


def _initial_centroids(X, cfg, rng):

    if cfg.init == 'explicit':
        return np.array(cfg.centroids, dtype=float, ndmin=2)
    elif cfg.init == 'preliminary_subsample':
        return preliminary_phase(X, cfg, rng)
    else:
        return kmeanspp_init(X, cfg.k, rng, distance=cfg.distance)


def kmeans_fit(m, cfg):
    '''Best of several seeded k-means fits

    Replicate r is initialized from a generator seeded with
    ``cfg.seed + r``. The model with the smallest J wins; ties go to
    the lowest replicate index, so the result does not depend on the
    order in which replicates finish.

    Parameters
    ----------
    m : FeatureMatrix or array-like
        Data, n x d
    cfg : KMeansConfig
        Configuration

    Returns
    -------
    KMeansModel
        Winning model

    '''

    X = as_values(m)
    cfg.validate(n=len(X))

    models = []
    for r in range(cfg.replicates):
        rng = np.random.default_rng(cfg.seed + r)
        model = lloyd(X, _initial_centroids(X, cfg, rng), cfg)
        logger.debug('Replicate %d: J = %g after %d iterations', r, model.objective, model.iterations)
        models.append(model)

    r = int(np.argmin([model.objective for model in models]))

    logger.info('k-means with k = %d: J = %g (replicate %d of %d)', cfg.k,
                models[r].objective, r, cfg.replicates)

    return dataclasses.replace(models[r], replicate_chosen=r)


def kmeans_predict(model, m):
    '''Assign rows to the nearest centroid of a fitted model

    Ties go to the lowest cluster index.

    Raises
    ------
    DataError
        If the number of columns does not match the model

    '''

    X = as_values(m)
    if X.shape[1] != model.centroids.shape[1]:
        raise DataError('Data has %d columns, model has %d' % (X.shape[1],
                                                                model.centroids.shape[1]))

    D = pairwise_distance(X, model.centroids, model.config.distance)
    return Assignment(np.argmin(D, axis=1), row_keys=row_keys_of(m))
