'''Gaussian mixture clustering by expectation-maximization

Four covariance structures are supported, combining a ``diagonal`` or
``full`` shape with ``shared`` or ``unshared`` matrices across
components. Rows are assigned to the component with the largest
posterior probability.

'''

import json
import logging
import dataclasses
import numpy as np
import scipy.linalg
import scipy.special

from .errors import ComponentCollapseError, DataError, NumericalError, UsageError
from .features import as_values, row_keys_of
from .kmeans import kmeanspp_init
from .assignment import Assignment


COVARIANCE_SHAPES = ('diagonal', 'full')
COVARIANCE_SHARING = ('shared', 'unshared')
COVARIANCE_STRUCTURES = [(shape, sharing)
                         for shape in COVARIANCE_SHAPES
                         for sharing in COVARIANCE_SHARING]

# initialize logger
logger = logging.getLogger(__name__)


@dataclasses.dataclass
class GmmConfig:
    '''Configuration of a Gaussian mixture fit

    Parameters
    ----------
    k : int
        Number of components
    covariance_shape : str
        ``diagonal`` or ``full`` (default)
    covariance_sharing : str
        ``shared`` or ``unshared`` (default)
    tol : float
        Relative log-likelihood improvement below which EM stops
        (default: 1e-6)
    max_iter : int
        Maximum number of EM iterations (default: 1000)
    regularization : float
        Ridge added to covariance diagonals (default: 1e-6)
    replicates : int
        Number of independently seeded restarts (default: 5)
    seed : int
        Base seed; replicate r uses ``seed + r``

    '''

    k: int
    covariance_shape: str = 'full'
    covariance_sharing: str = 'unshared'
    tol: float = 1e-6
    max_iter: int = 1000
    regularization: float = 1e-6
    replicates: int = 5
    seed: int = 0


    def validate(self, n=None):

        if int(self.k) != self.k or self.k < 1:
            raise UsageError('k must be a positive integer, got %s' % self.k)
        if self.covariance_shape not in COVARIANCE_SHAPES:
            raise UsageError('Unknown covariance shape: %s' % self.covariance_shape)
        if self.covariance_sharing not in COVARIANCE_SHARING:
            raise UsageError('Unknown covariance sharing: %s' % self.covariance_sharing)
        if self.tol < 0:
            raise UsageError('Tolerance must be non-negative, got %s' % self.tol)
        if self.max_iter < 1:
            raise UsageError('max_iter must be positive, got %s' % self.max_iter)
        if self.regularization < 0:
            raise UsageError('Regularization must be non-negative, got %s' % self.regularization)
        if self.replicates < 1:
            raise UsageError('Number of replicates must be positive, got %s' % self.replicates)
        if int(self.seed) != self.seed or self.seed < 0:
            raise UsageError('Seed must be a non-negative integer, got %s' % self.seed)
        if n is not None and n <= self.k:
            raise UsageError('Mixture fit needs more rows (%d) than components (%d)' % (n, self.k))


    @property
    def structure(self):

        return '%s_%s' % (self.covariance_shape, self.covariance_sharing)


    def to_dict(self):

        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class GmmModel:
    '''Fitted Gaussian mixture

    Attributes
    ----------
    weights : numpy.ndarray
        Mixing proportions, K
    means : numpy.ndarray
        Component means, K x d
    covariances : numpy.ndarray
        Component covariances, K x d x d; bit-identical across
        components for shared structures
    log_likelihood : float
        Log-likelihood of the training data under the model
    iterations : int
        Number of M-steps
    history : tuple of float
        Log-likelihood at every E-step since the last re-seeding
    config : GmmConfig
        Configuration of the fit

    '''

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    log_likelihood: float = np.nan
    iterations: int = 0
    history: tuple = ()
    config: GmmConfig = None


    def __post_init__(self):

        for arr in (self.weights, self.means, self.covariances):
            arr.setflags(write=False)


    @property
    def k(self):

        return len(self.weights)


    @property
    def d(self):

        return self.means.shape[1]


    def to_dict(self):

        config = self.config.to_dict() if self.config is not None else None
        return dict(model='gmm',
                    structure=self.config.structure if self.config is not None else None,
                    weights=self.weights.tolist(),
                    means=self.means.tolist(),
                    covariances=self.covariances.tolist(),
                    log_likelihood=self.log_likelihood,
                    iterations=self.iterations,
                    seed=config['seed'] if config else None,
                    config=config)


    def to_json(self):

        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def gaussian_log_pdf(x, mean, cov):
    '''Log density of a multivariate normal distribution

    Uses the Cholesky factor of the covariance, so the density itself
    is never formed.

    Parameters
    ----------
    x : array-like
        Point of length d, or n x d points
    mean : array-like
        Mean of length d
    cov : array-like
        Symmetric positive definite covariance, d x d

    Returns
    -------
    float or numpy.ndarray
        Log density per point

    Raises
    ------
    NumericalError
        If the covariance is not positive definite

    '''

    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    mean = np.asarray(mean, dtype=float).reshape(-1)
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = len(mean)

    try:
        L = scipy.linalg.cholesky(cov, lower=True)
    except np.linalg.LinAlgError:
        raise NumericalError('Covariance matrix is not positive definite')

    z = scipy.linalg.solve_triangular(L, (x - mean).T, lower=True)
    log_det = 2. * np.sum(np.log(np.diag(L)))
    logp = -.5 * (d * np.log(2. * np.pi) + log_det + np.sum(z**2., axis=0))

    return float(logp[0]) if single else logp


def _check_dimensions(model, X):

    if X.shape[1] != model.d:
        raise DataError('Data has %d columns, model has %d' % (X.shape[1], model.d))


def _log_joint(model, X):

    logp = np.empty((len(X), model.k))
    with np.errstate(divide='ignore'):
        log_weights = np.log(model.weights)
    for j in range(model.k):
        logp[:, j] = log_weights[j] + gaussian_log_pdf(X, model.means[j], model.covariances[j])
    return logp


def e_step(model, m):
    '''Posterior component probabilities of each row

    Responsibilities are normalized with log-sum-exp, so well
    separated components do not underflow.

    Returns
    -------
    responsibilities : numpy.ndarray
        Posterior probabilities, n x K; rows sum to one
    log_likelihood : float
        Total log-likelihood of the rows

    Raises
    ------
    DataError
        If the number of columns does not match the model

    '''

    X = as_values(m)
    _check_dimensions(model, X)

    logp = _log_joint(model, X)
    lse = scipy.special.logsumexp(logp, axis=1)

    resp = np.exp(logp - lse[:, np.newaxis])
    resp /= resp.sum(axis=1, keepdims=True)

    return resp, float(np.sum(lse))


def _shape_covariance(S, shape, regularization):

    S = .5 * (S + S.T)
    if shape == 'diagonal':
        S = np.diag(np.diag(S))
    return S + regularization * np.eye(len(S))


def m_step(m, r, cfg):
    '''Maximum-likelihood parameters given responsibilities

    Weights are mean responsibilities, means are responsibility
    weighted row means and covariances responsibility weighted
    scatter matrices. Diagonal shapes zero the off-diagonals, shared
    structures pool the scatter over components, and the ridge is
    added last.

    Parameters
    ----------
    m : FeatureMatrix or array-like
        Data, n x d
    r : numpy.ndarray
        Responsibilities, n x K
    cfg : GmmConfig
        Configuration

    Returns
    -------
    GmmModel
        Model with the new parameters

    Raises
    ------
    ComponentCollapseError
        If a component has (almost) no responsibility mass

    '''

    X = as_values(m)
    r = np.asarray(r, dtype=float)
    n, d = X.shape
    k = r.shape[1]

    mass = r.sum(axis=0)
    for j in range(k):
        if mass[j] <= np.finfo(float).eps * n:
            raise ComponentCollapseError(j, mass[j])

    weights = mass / mass.sum()
    means = r.T.dot(X) / mass[:, np.newaxis]

    scatter = np.empty((k, d, d))
    for j in range(k):
        diff = X - means[j]
        scatter[j] = (r[:, j, np.newaxis] * diff).T.dot(diff)

    if cfg.covariance_sharing == 'shared':
        pooled = _shape_covariance(scatter.sum(axis=0) / n, cfg.covariance_shape, cfg.regularization)
        covariances = np.repeat(pooled[np.newaxis], k, axis=0)
    else:
        covariances = np.stack([_shape_covariance(scatter[j] / mass[j], cfg.covariance_shape,
                                                  cfg.regularization)
                                for j in range(k)])

    return GmmModel(weights=weights, means=means, covariances=covariances, config=cfg)


def _initial_model(X, cfg, rng):

    means = kmeanspp_init(X, cfg.k, rng)
    cov = _shape_covariance(np.atleast_2d(np.cov(X, rowvar=False, bias=True)),
                            cfg.covariance_shape, cfg.regularization)

    return GmmModel(weights=np.full(cfg.k, 1. / cfg.k),
                    means=means,
                    covariances=np.repeat(cov[np.newaxis], cfg.k, axis=0),
                    config=cfg)


def _reseed(model, X, component, rng):

    means = model.means.copy()
    means[component] = X[rng.integers(len(X))]

    weights = np.full(model.k, 1. / model.k)
    cov = _shape_covariance(np.atleast_2d(np.cov(X, rowvar=False, bias=True)),
                            model.config.covariance_shape, model.config.regularization)
    covariances = model.covariances.copy()
    if model.config.covariance_sharing == 'shared':
        covariances = np.repeat(cov[np.newaxis], model.k, axis=0)
    else:
        covariances[component] = cov

    return GmmModel(weights=weights, means=means, covariances=covariances, config=model.config)


def _em(X, cfg, rng):

    model = _initial_model(X, cfg, rng)

    history = []
    reseeded = False
    iterations = 0
    while True:

        resp, ll = e_step(model, X)
        history.append(ll)

        if len(history) > 1 and history[-1] - history[-2] < cfg.tol * abs(history[-2]):
            break
        if iterations >= cfg.max_iter:
            logger.warning('EM stopped after %d iterations without converging', iterations)
            break

        try:
            model = m_step(X, resp, cfg)
        except ComponentCollapseError as e:
            if reseeded:
                raise
            logger.warning('%s, re-seeding it at a random row', e)
            model = _reseed(model, X, e.component, rng)
            reseeded = True
            history = []

        iterations += 1

    return dataclasses.replace(model, log_likelihood=history[-1],
                               iterations=iterations, history=tuple(history))


def gmm_fit(m, cfg):
    '''Fit a Gaussian mixture by EM, best of several seeded replicates

    Each replicate starts from k-means++ means, uniform weights and
    the (shaped) global covariance, then alternates E- and M-steps
    until the relative log-likelihood improvement drops below
    ``cfg.tol``. A collapsed component is re-seeded once at a random
    row; a second collapse is an error. The replicate with the largest
    log-likelihood wins, ties going to the lowest index.

    Parameters
    ----------
    m : FeatureMatrix or array-like
        Data, n x d with n > k
    cfg : GmmConfig
        Configuration

    Returns
    -------
    GmmModel
        Winning model

    Raises
    ------
    ComponentCollapseError
        On a persistent component collapse

    '''

    X = as_values(m)
    cfg.validate(n=len(X))

    models = []
    for r in range(cfg.replicates):
        rng = np.random.default_rng(cfg.seed + r)
        model = _em(X, cfg, rng)
        logger.debug('Replicate %d: log-likelihood %g after %d iterations', r,
                     model.log_likelihood, model.iterations)
        models.append(model)

    r = int(np.argmax([model.log_likelihood for model in models]))

    logger.info('GMM (%s) with k = %d: log-likelihood %g (replicate %d of %d)',
                cfg.structure, cfg.k, models[r].log_likelihood, r, cfg.replicates)

    return models[r]


def gmm_cluster(model, m):
    '''Assign rows to the component with the largest posterior

    Ties go to the lowest component index. The responsibilities are
    kept in the assignment.

    '''

    resp, _ = e_step(model, m)
    return Assignment(np.argmax(resp, axis=1), row_keys=row_keys_of(m),
                      responsibilities=resp)
