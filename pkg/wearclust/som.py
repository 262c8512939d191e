'''Self-organizing maps on a hexagonal grid

Neurons are laid out on a rows x cols parallelogram of a hexagonal
lattice in axial coordinates: neuron ``i`` sits at column ``q = i %
cols`` and row ``r = i // cols``, and its six neighbors are the axial
offsets (+-1, 0), (0, +-1), (+1, -1) and (-1, +1). In the plane the
neurons are one unit apart.

Training uses the batch algorithm: every epoch assigns all rows to
their best-matching unit and replaces each weight by the neighborhood
weighted mean of the rows, with a Gaussian neighborhood over the grid
distance whose radius shrinks linearly.

'''

import json
import logging
import itertools
import dataclasses
import numpy as np
import xarray as xr
from scipy.spatial.distance import cdist

from .errors import DataError, UsageError
from .features import FeatureMatrix, as_values


INITS = ('random_sample', 'linear_span')
AXIAL_NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))

# initialize logger
logger = logging.getLogger(__name__)


@dataclasses.dataclass
class SomConfig:
    '''Configuration of a self-organizing map

    Parameters
    ----------
    rows, cols : int
        Grid dimensions (default: 6 x 6)
    epochs : int
        Number of batch epochs (default: 200)
    initial_radius : float, optional
        Neighborhood radius of the first epoch (default: half the
        largest grid dimension, at least ``final_radius``)
    final_radius : float
        Neighborhood radius of the last epoch (default: 1.0). At 1.0
        the Gaussian neighborhood still couples adjacent neurons, so
        on tight clusters the trained quantization error can end above
        that of a random-sample initialization; 0.3 lets the map refine.
    init : str
        ``random_sample`` (default) or ``linear_span``
    seed : int
        Seed of the initialization

    '''

    rows: int = 6
    cols: int = 6
    epochs: int = 200
    initial_radius: float = None
    final_radius: float = 1.
    init: str = 'random_sample'
    seed: int = 0
    topology: str = 'hexagonal'


    def __post_init__(self):

        if self.initial_radius is None:
            self.initial_radius = max(max(self.rows, self.cols) / 2., self.final_radius)


    def validate(self):

        if self.rows < 1 or self.cols < 1:
            raise UsageError('Grid needs at least one neuron, got %d x %d' % (self.rows, self.cols))
        if self.epochs < 1:
            raise UsageError('Number of epochs must be positive, got %s' % self.epochs)
        if not self.initial_radius >= self.final_radius > 0:
            raise UsageError('Radii must satisfy initial >= final > 0, got %s and %s' % (
                self.initial_radius, self.final_radius))
        if self.init not in INITS:
            raise UsageError('Unknown initialization: %s' % self.init)
        if self.topology != 'hexagonal':
            raise UsageError('Only the hexagonal topology is supported')
        if int(self.seed) != self.seed or self.seed < 0:
            raise UsageError('Seed must be a non-negative integer, got %s' % self.seed)


    @property
    def size(self):

        return self.rows * self.cols


    def radius(self, epoch):
        '''Neighborhood radius at an epoch, decaying linearly'''

        if self.epochs == 1:
            return float(self.final_radius)
        return float(self.initial_radius + (self.final_radius - self.initial_radius)
                     * epoch / (self.epochs - 1.))


    def to_dict(self):

        return dataclasses.asdict(self)


class HexGrid:
    '''Hexagonal neuron lattice in axial coordinates

    Attributes
    ----------
    axial : numpy.ndarray
        Axial (q, r) coordinates per neuron
    positions : numpy.ndarray
        Plane (x, y) positions per neuron, unit spacing
    edges : list of 2-tuples
        Neighboring neuron pairs (i, j) with i < j

    '''


    def __init__(self, rows, cols):

        self.rows = rows
        self.cols = cols

        q, r = np.meshgrid(np.arange(cols), np.arange(rows))
        self.axial = np.column_stack((q.ravel(), r.ravel()))
        self.positions = np.column_stack((self.axial[:, 0] + .5 * self.axial[:, 1],
                                          np.sqrt(3.) / 2. * self.axial[:, 1]))

        self.edges = []
        for i, (qi, ri) in enumerate(self.axial):
            for dq, dr in AXIAL_NEIGHBORS:
                j = self.index(qi + dq, ri + dr)
                if j is not None and i < j:
                    self.edges.append((i, j))
        self.edges.sort()


    def __len__(self):

        return self.rows * self.cols


    def index(self, q, r):

        if 0 <= q < self.cols and 0 <= r < self.rows:
            return int(r * self.cols + q)
        return None


    def neighbors(self, i):

        return sorted([b for a, b in self.edges if a == i] + [a for a, b in self.edges if b == i])


    def grid_distances(self):
        '''Hexagonal step distance between all neuron pairs'''

        dq = self.axial[:, 0, np.newaxis] - self.axial[np.newaxis, :, 0]
        dr = self.axial[:, 1, np.newaxis] - self.axial[np.newaxis, :, 1]
        return (np.abs(dq) + np.abs(dr) + np.abs(dq + dr)) / 2.


def neighborhood(distance, radius):
    '''Gaussian neighborhood ``exp(-distance^2 / (2 radius^2))``'''

    return np.exp(-np.asarray(distance, dtype=float)**2. / (2. * radius**2.))


class SomModel:
    '''Self-organizing map weights on a hexagonal grid

    Parameters
    ----------
    weights : numpy.ndarray
        Neuron weights, (rows * cols) x d
    config : SomConfig
        Configuration
    trained_epochs : int, optional
        Number of epochs trained so far
    history : iterable of float, optional
        Quantization error after every trained epoch

    '''


    def __init__(self, weights, config, trained_epochs=0, history=()):

        self.config = config
        self.grid = HexGrid(config.rows, config.cols)
        self.weights = np.array(weights, dtype=float, ndmin=2)
        self.weights.setflags(write=False)
        self.trained_epochs = trained_epochs
        self.history = tuple(history)

        if len(self.weights) != len(self.grid):
            raise DataError('Got %d weight vectors for %d neurons' % (len(self.weights),
                                                                      len(self.grid)))
        if not np.all(np.isfinite(self.weights)):
            raise DataError('Neuron weights must be finite')


    def __len__(self):

        return len(self.grid)


    @property
    def d(self):

        return self.weights.shape[1]


    def to_dataset(self):
        '''Weights and grid coordinates as an :class:`xarray.Dataset`'''

        return xr.Dataset(
            data_vars=dict(weights=(('neuron', 'feature'), self.weights)),
            coords=dict(neuron=np.arange(len(self)),
                        q=('neuron', self.grid.axial[:, 0]),
                        r=('neuron', self.grid.axial[:, 1]),
                        x=('neuron', self.grid.positions[:, 0]),
                        y=('neuron', self.grid.positions[:, 1])),
            attrs=dict(trained_epochs=self.trained_epochs))


    def to_dict(self):

        return dict(model='som',
                    weights=self.weights.tolist(),
                    axial=self.grid.axial.tolist(),
                    positions=self.grid.positions.tolist(),
                    trained_epochs=self.trained_epochs,
                    seed=self.config.seed,
                    config=self.config.to_dict())


    def to_json(self):

        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class UMatrix:
    '''Distances between the weights of neighboring neurons

    Attributes
    ----------
    edges : list of 3-tuples
        (i, j, distance) per neighboring pair, i < j
    neuron_mean : numpy.ndarray
        Mean distance over the edges of each neuron (zero for a
        neuron without neighbors)
    positions : numpy.ndarray
        Plane positions of the neurons, for rendering

    '''


    def __init__(self, edges, neuron_mean, positions):

        self.edges = edges
        self.neuron_mean = neuron_mean
        self.positions = positions


    def distance(self, i, j):

        i, j = min(i, j), max(i, j)
        for a, b, dist in self.edges:
            if (a, b) == (i, j):
                return dist
        raise KeyError('Neurons %d and %d are not neighbors' % (i, j))


    def to_dict(self):

        return dict(edges=[dict(i=i, j=j, distance=dist,
                                xy_i=self.positions[i].tolist(),
                                xy_j=self.positions[j].tolist())
                           for i, j, dist in self.edges],
                    neuron_mean=self.neuron_mean.tolist())


def _check_data(model, X):

    if X.shape[1] != model.d:
        raise DataError('Data has %d columns, map has %d' % (X.shape[1], model.d))


def som_init(m, cfg):
    '''Initial map weights

    ``random_sample`` draws every weight uniformly from the data rows;
    ``linear_span`` spreads the weights over the plane of the first two
    principal axes, one standard deviation to each side of the mean.

    Raises
    ------
    DataError
        If there are no rows

    '''

    cfg.validate()
    X = as_values(m)
    if X.shape[0] == 0:
        raise DataError('Cannot initialize a map without data')

    if cfg.init == 'random_sample':
        rng = np.random.default_rng(cfg.seed)
        weights = X[rng.integers(len(X), size=cfg.size)]

    else:
        grid = HexGrid(cfg.rows, cfg.cols)
        mean = X.mean(axis=0)
        weights = np.repeat(mean[np.newaxis], cfg.size, axis=0)

        if len(X) > 1:
            _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
            scale = s / np.sqrt(len(X) - 1.)
            span = [np.linspace(-1., 1., cfg.cols) if cfg.cols > 1 else np.zeros(1),
                    np.linspace(-1., 1., cfg.rows) if cfg.rows > 1 else np.zeros(1)]
            for axis in range(min(2, len(s))):
                coef = span[axis][grid.axial[:, axis]]
                weights = weights + coef[:, np.newaxis] * scale[axis] * vt[axis]

    return SomModel(weights, cfg)


def bmu(model, x):
    '''Index of the neuron whose weight is nearest to x

    Ties go to the lowest index.

    Raises
    ------
    DataError
        On a dimension mismatch

    '''

    x = np.asarray(x, dtype=float).reshape(1, -1)
    _check_data(model, x)
    return int(np.argmin(cdist(x, model.weights, 'sqeuclidean')[0]))


def _bmus(model, X):

    D = cdist(X, model.weights, 'sqeuclidean')
    return np.argmin(D, axis=1), np.sqrt(D[np.arange(len(X)), np.argmin(D, axis=1)])


def som_train(model, m, cfg):
    '''Batch training

    Per epoch every row is assigned to its best-matching unit; each
    neuron's new weight is the mean of all rows weighted by the
    neighborhood between the neuron and the row's best-matching unit.
    Neurons without neighborhood mass keep their weight.

    Parameters
    ----------
    model : SomModel
        Initial map
    m : FeatureMatrix or array-like
        Training data
    cfg : SomConfig
        Configuration; ``epochs`` and the radii are used

    Returns
    -------
    SomModel
        Trained map

    Raises
    ------
    DataError
        If there are no rows or the dimensions do not match

    '''

    cfg.validate()
    X = as_values(m)
    if X.shape[0] == 0:
        raise DataError('Cannot train a map without data')
    _check_data(model, X)

    grid_dist = model.grid.grid_distances()
    weights = np.array(model.weights)

    history = list(model.history)
    for epoch in range(cfg.epochs):

        labels = np.argmin(cdist(X, weights, 'sqeuclidean'), axis=1)

        h = neighborhood(grid_dist[:, labels], cfg.radius(epoch))
        mass = h.sum(axis=1)
        alive = mass > 0

        weights[alive] = h[alive].dot(X) / mass[alive, np.newaxis]

        if not alive.all():
            logger.debug('Epoch %d: %d neurons without neighborhood mass', epoch, np.sum(~alive))

        history.append(float(np.mean(np.sqrt(np.min(cdist(X, weights, 'sqeuclidean'), axis=1)))))

    logger.info('Trained %d x %d map for %d epochs, quantization error %g',
                cfg.rows, cfg.cols, cfg.epochs, history[-1])

    return SomModel(weights, model.config,
                    trained_epochs=model.trained_epochs + cfg.epochs,
                    history=history)


def u_matrix(model):
    '''Euclidean weight distance of every pair of neighboring neurons'''

    edges = []
    incident = [[] for _ in range(len(model))]
    for i, j in model.grid.edges:
        dist = float(np.linalg.norm(model.weights[i] - model.weights[j]))
        edges.append((i, j, dist))
        incident[i].append(dist)
        incident[j].append(dist)

    neuron_mean = np.array([np.mean(x) if x else 0. for x in incident])

    return UMatrix(edges, neuron_mean, model.grid.positions)


def sample_hits(model, m):
    '''Number of rows per best-matching unit

    An empty data set gives all-zero counts.

    Raises
    ------
    DataError
        On a dimension mismatch

    '''

    if _is_empty(m):
        return np.zeros(len(model), dtype=int)

    X = as_values(m)
    _check_data(model, X)

    labels, _ = _bmus(model, X)
    return np.bincount(labels, minlength=len(model))


def _is_empty(m):

    return not isinstance(m, FeatureMatrix) and np.size(m) == 0


def quantization_error(model, m):
    '''Mean Euclidean distance from each row to its best-matching weight

    Raises
    ------
    DataError
        If there are no rows or the dimensions do not match

    '''

    if _is_empty(m):
        raise DataError('Quantization error of an empty data set is undefined')

    X = as_values(m)
    _check_data(model, X)

    _, dist = _bmus(model, X)
    return float(np.mean(dist))


def som_assign(model, m):
    '''Best-matching unit of every row'''

    X = as_values(m)
    _check_data(model, X)
    return _bmus(model, X)[0]


def boundary_contrast(model, m, labels):
    '''Mean U-matrix edge distance across and within labelled groups

    Every neuron is labelled with the majority label of the rows it
    wins, or with the label of the row nearest to its weight if it wins
    none. Edges between neurons with different labels are boundary
    edges.

    Returns
    -------
    across : float
        Mean distance of boundary edges (NaN if none)
    within : float
        Mean distance of edges inside one group (NaN if none)

    '''

    X = as_values(m)
    labels = np.asarray(labels)
    if len(labels) != len(X):
        raise DataError('Got %d labels for %d rows' % (len(labels), len(X)))
    winners = som_assign(model, X)

    neuron_labels = labels[np.argmin(cdist(model.weights, X, 'sqeuclidean'), axis=1)]
    for neuron in np.unique(winners):
        values, counts = np.unique(labels[winners == neuron], return_counts=True)
        neuron_labels[neuron] = values[np.argmax(counts)]

    across, within = [], []
    for i, j, dist in u_matrix(model).edges:
        (across if neuron_labels[i] != neuron_labels[j] else within).append(dist)

    return (float(np.mean(across)) if across else np.nan,
            float(np.mean(within)) if within else np.nan)
