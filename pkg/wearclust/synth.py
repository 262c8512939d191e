'''Synthetic feature mixtures and simulated smartwatch recordings

Two generators stand in for patient data. :func:`gen_mixture` samples
labelled rows from a Gaussian mixture in feature space.
:func:`gen_sensor_streams` simulates the raw sensor streams of a watch
wearer following an activity schedule, with a heart rate that can be
coupled to the acceleration.

'''

import os
import logging
import dataclasses
import numpy as np

from .errors import UsageError
from .features import FeatureMatrix
from .streams import (HEART_RATE, ACCELEROMETER, GSR, AMBIENT_LIGHT,
                      DEFAULT_SCHEDULE, SensorStream, serialize_stream)
from .export import atomic_write


HR_RANGE = (30., 220.)

# initialize logger
logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Regime:
    '''Activity regime with heart rate and acceleration statistics

    Heart rates are in bpm, acceleration magnitudes in g, skin
    resistance in kOhm and light in lux.

    '''

    hr_mean: float
    hr_sd: float
    accel_mean: float
    accel_sd: float
    gsr_mean: float = 300.
    lux_median: float = 200.


REGIMES = {
    'rest': Regime(hr_mean=65., hr_sd=4., accel_mean=1.0, accel_sd=.02,
                   gsr_mean=420., lux_median=150.),
    'walk': Regime(hr_mean=100., hr_sd=6., accel_mean=1.3, accel_sd=.12,
                   gsr_mean=320., lux_median=800.),
    'run': Regime(hr_mean=150., hr_sd=8., accel_mean=1.9, accel_sd=.3,
                  gsr_mean=220., lux_median=2000.),
}


@dataclasses.dataclass
class MixtureSpec:
    '''Gaussian mixture to sample labelled feature rows from

    Parameters
    ----------
    components : list of 3-tuples
        (weight, mean vector, covariance matrix) per component
    n : int
        Total number of rows
    seed : int
        Seed of the sampler
    balanced : bool, optional
        Use counts proportional to the weights instead of multinomial
        counts
    column_names : list of str, optional
        Names of the feature columns (default: f0, f1, ...)

    '''

    components: list
    n: int
    seed: int = 0
    balanced: bool = False
    column_names: list = None


    @property
    def d(self):

        return len(self.components[0][1])


    @property
    def weights(self):

        return np.array([w for w, _, _ in self.components], dtype=float)


    def validate(self):

        if not self.components:
            raise UsageError('Mixture needs at least one component')
        if int(self.n) != self.n or self.n < 1:
            raise UsageError('Number of rows must be a positive integer, got %s' % self.n)
        if int(self.seed) != self.seed or self.seed < 0:
            raise UsageError('Seed must be a non-negative integer, got %s' % self.seed)

        weights = self.weights
        if np.any(weights <= 0) or abs(weights.sum() - 1.) > 1e-9:
            raise UsageError('Mixture weights must be positive and sum to one')

        for j, (_, mean, cov) in enumerate(self.components):
            mean = np.asarray(mean, dtype=float)
            cov = np.asarray(cov, dtype=float)
            if mean.shape != (self.d,) or cov.shape != (self.d, self.d):
                raise UsageError('Component %d does not have dimension %d' % (j, self.d))
            if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
                raise UsageError('Component %d has non-finite parameters' % j)
            if not np.allclose(cov, cov.T, rtol=0., atol=1e-12):
                raise UsageError('Covariance of component %d is not symmetric' % j)
            if np.min(np.linalg.eigvalsh(cov)) < -1e-9 * max(1., np.abs(cov).max()):
                raise UsageError('Covariance of component %d is not positive semi-definite' % j)

        if self.column_names is not None and len(self.column_names) != self.d:
            raise UsageError('Got %d column names for %d dimensions' % (len(self.column_names), self.d))


    def counts(self, rng):

        if not self.balanced:
            return rng.multinomial(self.n, self.weights)

        exact = self.weights * self.n
        counts = np.floor(exact).astype(int)
        remainder = self.n - counts.sum()
        counts[np.argsort(-(exact - counts), kind='stable')[:remainder]] += 1
        return counts


    def to_dict(self):

        return dict(components=[dict(weight=float(w),
                                     mean=np.asarray(mu, dtype=float).tolist(),
                                     covariance=np.asarray(cov, dtype=float).tolist())
                                for w, mu, cov in self.components],
                    n=self.n, seed=self.seed, balanced=self.balanced)


def gen_mixture(spec):
    '''Sample labelled rows from a Gaussian mixture

    Parameters
    ----------
    spec : MixtureSpec
        Mixture specification

    Returns
    -------
    FeatureMatrix
        Sampled rows in random order
    numpy.ndarray
        Index of the generating component per row

    Raises
    ------
    UsageError
        If the specification is invalid

    '''

    spec.validate()
    rng = np.random.default_rng(spec.seed)

    X, labels = [], []
    for j, ((_, mean, cov), count) in enumerate(zip(spec.components, spec.counts(rng))):
        X.append(rng.multivariate_normal(np.asarray(mean, dtype=float),
                                         np.asarray(cov, dtype=float), size=count))
        labels.append(np.full(count, j, dtype=int))

    X = np.concatenate(X, axis=0)
    labels = np.concatenate(labels)

    order = rng.permutation(spec.n)
    column_names = spec.column_names or ['f%d' % i for i in range(spec.d)]

    return FeatureMatrix(X[order], column_names, attrs=dict(seed=spec.seed)), labels[order]


def blobs(k, d=2, separation=10., sigma=1., n_per=100, seed=0):
    '''Equal spherical Gaussian blobs with evenly spaced means

    Means lie on a circle in the first two dimensions with adjacent
    means ``separation * sigma`` apart; in one dimension they lie on a
    line with that spacing.

    Returns
    -------
    MixtureSpec
        Balanced mixture with ``k * n_per`` rows

    '''

    if k < 1 or d < 1 or n_per < 1:
        raise UsageError('Blobs need k, d and n_per of at least one')
    if separation < 0 or sigma < 0:
        raise UsageError('Separation and sigma must be non-negative')

    spacing = separation * sigma
    means = np.zeros((k, d))
    if d == 1:
        means[:, 0] = spacing * np.arange(k)
    elif k > 1:
        radius = spacing / (2. * np.sin(np.pi / k))
        angle = 2. * np.pi * np.arange(k) / k
        means[:, 0] = radius * np.cos(angle)
        means[:, 1] = radius * np.sin(angle)

    cov = sigma**2. * np.eye(d)
    return MixtureSpec([(1. / k, mu, cov) for mu in means],
                       n=k * n_per, seed=seed, balanced=True)


@dataclasses.dataclass
class ActivitySchedule:
    '''Sequence of activity segments of a simulated wearer

    Parameters
    ----------
    segments : list of 2-tuples
        (duration in seconds, regime name) per segment
    coupling : float
        Share of the heart rate driven by the activity, between 0 and 1.
        At zero the heart rate is independent of the acceleration.
    gain : float
        Heart rate response in bpm per g of acceleration deviation
        from the regime mean, scaled by the coupling
    regimes : dict, optional
        Regime statistics by name (default: rest, walk and run)

    '''

    segments: list
    coupling: float = .8
    gain: float = 40.
    regimes: dict = dataclasses.field(default_factory=lambda: dict(REGIMES))


    @classmethod
    def mixed(cls, duration, segment=300, cycle=('rest', 'walk', 'rest', 'run'), **kwargs):
        '''Schedule cycling through regimes in fixed length segments'''

        segments = []
        remaining = int(duration)
        while remaining > 0:
            segments.append((min(segment, remaining), cycle[len(segments) % len(cycle)]))
            remaining -= segment

        return cls(segments, **kwargs)


    @property
    def duration(self):

        return sum(int(t) for t, _ in self.segments)


    def validate(self):

        if not self.segments:
            raise UsageError('Schedule needs at least one segment')
        for duration, regime in self.segments:
            if int(duration) != duration or duration <= 0:
                raise UsageError('Segment durations must be positive whole seconds, got %s' % duration)
            if regime not in self.regimes:
                raise UsageError('Unknown activity regime: %s' % regime)
        for name, regime in self.regimes.items():
            if not HR_RANGE[0] <= regime.hr_mean <= HR_RANGE[1]:
                raise UsageError('Heart rate mean of regime "%s" outside [%g, %g] bpm' % (
                    (name,) + HR_RANGE))
            if min(regime.hr_sd, regime.accel_sd) < 0 or regime.accel_mean <= 0:
                raise UsageError('Regime "%s" has invalid spreads or acceleration' % name)
        if not 0 <= self.coupling <= 1:
            raise UsageError('Coupling must be between 0 and 1, got %s' % self.coupling)


    def per_second(self, attribute):
        '''Regime attribute for every second of the schedule'''

        return np.concatenate([np.full(int(t), getattr(self.regimes[r], attribute))
                               for t, r in self.segments])


    def to_dict(self):

        return dict(segments=[[int(t), r] for t, r in self.segments],
                    coupling=self.coupling, gain=self.gain,
                    regimes={k: dataclasses.asdict(v) for k, v in self.regimes.items()})


def _sample_times(seconds, start_ms, rate):

    offsets = np.arange(rate) * (1000 // rate)
    return (start_ms + 1000 * seconds[:, np.newaxis] + offsets).reshape(-1)


def gen_sensor_streams(schedule, seed, start_ms=0, recording=None):
    '''Simulate the sensor streams of a wearer following a schedule

    Every second ``s`` of the schedule has an activity level drawn from
    its regime. The heart rate mixes the resting rate with the regime
    rate by the coupling and follows the acceleration deviation with
    the coupling-scaled gain. The accelerometer tilts with the activity
    level so the magnitude of every sample is the activity level plus
    a little noise.

    Parameters
    ----------
    schedule : ActivitySchedule
        Activity schedule
    seed : int
        Seed of the simulation
    start_ms : int, optional
        Timestamp of the first second in milliseconds
    recording : 2-tuple, optional
        (on, off) durations in milliseconds; samples are only emitted
        during on-periods, which start at whole multiples of ``on + off``
        milliseconds since epoch like the blocks of :func:`segment_blocks`

    Returns
    -------
    dict
        SensorStream per modality name

    Raises
    ------
    UsageError
        If the schedule or recording cadence is invalid

    '''

    schedule.validate()
    if recording is not None and (recording[0] <= 0 or recording[1] < 0):
        raise UsageError('Invalid recording cadence: %s' % (recording,))

    rng = np.random.default_rng(seed)
    T = schedule.duration
    c = schedule.coupling

    accel_mean = schedule.per_second('accel_mean')
    activity = np.maximum(accel_mean + schedule.per_second('accel_sd') * rng.standard_normal(T), .05)

    rest_hr = schedule.regimes['rest'].hr_mean if 'rest' in schedule.regimes else HR_RANGE[0]
    hr = (1. - c) * rest_hr + c * schedule.per_second('hr_mean') \
        + c * schedule.gain * (activity - accel_mean) \
        + schedule.per_second('hr_sd') * rng.standard_normal(T)
    hr = np.clip(hr, *HR_RANGE)

    seconds = np.arange(T)
    if recording is not None:
        on, off = recording
        seconds = seconds[(start_ms + 1000 * seconds) % (on + off) < on]

    rate = ACCELEROMETER.nominal_rate
    magnitude = np.repeat(activity[seconds], rate) + .01 * rng.standard_normal(len(seconds) * rate)
    tilt = .5 * (np.repeat(activity[seconds], rate)[:, np.newaxis] - 1.) \
        + .05 * rng.standard_normal((len(seconds) * rate, 2))
    direction = np.column_stack((tilt, np.ones(len(tilt))))
    direction /= np.linalg.norm(direction, axis=1)[:, np.newaxis]
    accel = direction * np.maximum(magnitude, 0.)[:, np.newaxis]

    rate = GSR.nominal_rate
    gsr = np.repeat(schedule.per_second('gsr_mean')[seconds], rate) \
        + 5. * rng.standard_normal(len(seconds) * rate)

    rate = AMBIENT_LIGHT.nominal_rate
    lux = np.repeat(schedule.per_second('lux_median')[seconds], rate) \
        * rng.lognormal(0., .3, size=len(seconds) * rate)

    streams = {
        HEART_RATE.name: SensorStream(HEART_RATE, _sample_times(seconds, start_ms, 1), hr[seconds]),
        ACCELEROMETER.name: SensorStream(ACCELEROMETER,
                                         _sample_times(seconds, start_ms, ACCELEROMETER.nominal_rate),
                                         accel),
        GSR.name: SensorStream(GSR, _sample_times(seconds, start_ms, GSR.nominal_rate),
                               np.maximum(gsr, 1.)),
        AMBIENT_LIGHT.name: SensorStream(AMBIENT_LIGHT,
                                         _sample_times(seconds, start_ms, AMBIENT_LIGHT.nominal_rate),
                                         lux),
    }

    logger.debug('Simulated %d seconds with coupling %g', len(seconds), c)

    return streams


def simulate_corpus(subjects=10, hours=1., coupling=.8, seed=0,
                    start_ms=0, recording=DEFAULT_SCHEDULE):
    '''Simulate streams of several subjects on mixed schedules

    Subject ``i`` (named ``S01``, ``S02``, ...) is simulated with seed
    ``seed + i``.

    Returns
    -------
    dict
        Streams per modality name per subject

    '''

    if subjects < 1 or hours <= 0:
        raise UsageError('Corpus needs at least one subject and a positive duration')

    corpus = {}
    for i in range(subjects):
        schedule = ActivitySchedule.mixed(int(round(hours * 3600.)), coupling=coupling)
        corpus['S%02d' % (i + 1)] = gen_sensor_streams(schedule, seed + i, start_ms=start_ms,
                                                       recording=recording)

    return corpus


def write_corpus(path, corpus, writer=None):
    '''Write a corpus as one directory per subject with a CSV per modality

    Parameters
    ----------
    path : str
        Corpus directory
    corpus : dict
        Streams per modality name per subject
    writer : RunWriter, optional
        Writer relative to ``path`` recording the written files

    Returns
    -------
    list of str
        Written file paths

    '''

    fpaths = []
    for subject, streams in sorted(corpus.items()):
        for name, stream in sorted(streams.items()):
            fname = os.path.join(subject, '%s.csv' % name)
            if writer is not None:
                fpaths.append(writer.write(fname, serialize_stream(stream)))
            else:
                fpaths.append(os.path.join(path, fname))
                atomic_write(fpaths[-1], serialize_stream(stream))

    logger.info('Wrote corpus of %d subjects to %s', len(corpus), path)

    return fpaths
