'''Raw sensor streams and their segmentation into recording blocks

A smartwatch exposes every sensor as a separate stream sampled at its
own nominal rate. This module reads and writes those streams as CSV
files and cuts them into the on-periods of the recording schedule.

'''

import os
import json
import logging
import numpy as np

from .errors import DataError, UsageError


MODALITIES_FILE = 'modalities.json'
TIMESTAMP_COLUMN = 'timestamp_ms'
DEFAULT_SCHEDULE = (180000, 180000)

# initialize logger
logger = logging.getLogger(__name__)


class Modality:
    '''Sensor modality with its fixed sampling rate and channels

    Parameters
    ----------
    name : str
        Modality name (HeartRate, Accelerometer, GSR or AmbientLight)
    nominal_rate : int
        Nominal sampling rate in samples per second
    columns : tuple of str
        Names of the value channels in the stream CSV
    units : str
        Units of the channel values

    '''


    def __init__(self, name, nominal_rate, columns, units=None):

        self.name = name
        self.nominal_rate = int(nominal_rate)
        self.columns = tuple(columns)
        self.units = units


    def __repr__(self):

        return 'Modality(%s, %d Hz, %d channels)' % (self.name,
                                                     self.nominal_rate,
                                                     self.channels)


    def __eq__(self, other):

        return isinstance(other, Modality) and other.name == self.name


    def __hash__(self):

        return hash(self.name)


    @property
    def channels(self):

        return len(self.columns)


    @property
    def header(self):

        return ','.join((TIMESTAMP_COLUMN,) + self.columns)


    @classmethod
    def from_name(cls, name):
        '''Look up a modality in the modality table

        Raises
        ------
        DataError
            If the modality is unknown

        '''

        if isinstance(name, Modality):
            return name
        if name not in MODALITIES:
            raise DataError('Unknown modality: %s' % name)
        return MODALITIES[name]


def _load_modalities():

    jsonpath = os.path.join(os.path.split(__file__)[0], MODALITIES_FILE)
    with open(jsonpath, 'r') as fp:
        table = json.load(fp)

    return {name: Modality(name, spec['rate'], spec['columns'], spec.get('units'))
            for name, spec in table.items()}


MODALITIES = _load_modalities()

HEART_RATE = MODALITIES['HeartRate']
ACCELEROMETER = MODALITIES['Accelerometer']
GSR = MODALITIES['GSR']
AMBIENT_LIGHT = MODALITIES['AmbientLight']


class SensorStream:
    '''Timestamped samples of a single modality

    Parameters
    ----------
    modality : Modality or str
        Modality of the samples
    timestamps : iterable of int
        Sample timestamps in milliseconds since epoch, strictly
        increasing
    values : array-like
        Sample values with one column per modality channel
    text : list of str, optional
        Original CSV lines of the samples including their line
        terminators, used to reproduce the source file on
        serialization
    header_text : str, optional
        Original header line including its terminator
    trailer : str, optional
        Blank lines that followed the last sample in the source file

    Raises
    ------
    DataError
        If timestamps are not strictly increasing, the number of
        channels does not match the modality or heart rates are not
        positive

    '''


    def __init__(self, modality, timestamps, values, text=None, header_text=None, trailer=''):

        self.modality = Modality.from_name(modality)
        self.timestamps = np.asarray(timestamps, dtype=np.int64).reshape(-1)
        self.values = np.asarray(values, dtype=float).reshape(len(self.timestamps), -1) \
            if len(self.timestamps) else np.zeros((0, self.modality.channels))
        self.text = list(text) if text is not None else None
        self.header_text = header_text
        self.trailer = trailer

        if self.values.shape[1] != self.modality.channels:
            raise DataError('%s stream needs %d channels, got %d' % (self.modality.name,
                                                                      self.modality.channels,
                                                                      self.values.shape[1]))
        if np.any(np.diff(self.timestamps) <= 0):
            raise DataError('%s stream timestamps are not strictly increasing' % self.modality.name)
        if self.modality is HEART_RATE and np.any(self.values <= 0):
            raise DataError('Heart rate values must be positive')
        if self.text is not None and len(self.text) != len(self.timestamps):
            raise DataError('Source text does not match the number of samples')


    def __len__(self):

        return len(self.timestamps)


    def __repr__(self):

        return 'SensorStream(%s, %d samples)' % (self.modality.name, len(self))


    @property
    def name(self):

        return self.modality.name


    @property
    def sampling_rate(self):
        '''Observed sampling rate in Hz based on the median interval'''

        if len(self) < 2:
            return np.nan
        return 1000. / np.median(np.diff(self.timestamps))


    def select(self, mask):
        '''Return stream with the samples selected by a boolean mask'''

        mask = np.asarray(mask, dtype=bool)
        text = None
        if self.text is not None:
            text = [t for t, m in zip(self.text, mask) if m]
        return SensorStream(self.modality, self.timestamps[mask],
                            self.values[mask], text=text, header_text=self.header_text)


class StreamCsvReader:
    '''Reader for sensor stream CSV files

    Single channel streams have a ``timestamp_ms,value`` header, the
    accelerometer has ``timestamp_ms,x,y,z``. Rows are kept in file
    order; a row that does not advance the timestamp is an error.

    '''


    def __init__(self):

        self.reset()


    def __call__(self, content, modality):

        self.reset()
        return self.read(content, modality)


    def reset(self):

        self.modality = None
        self.lines = []
        self.timestamps = []
        self.values = []
        self.text = []
        self.trailer = ''

        self.n = 0 # line counter


    def read(self, content, modality):
        '''Parse stream content

        Parameters
        ----------
        content : bytes or str
            Raw file content
        modality : Modality or str
            Modality of the stream

        Returns
        -------
        SensorStream
            Parsed stream

        Raises
        ------
        DataError
            On a malformed header or row, a channel count mismatch or
            a non-monotone timestamp

        '''

        self.modality = Modality.from_name(modality)

        if isinstance(content, bytes):
            try:
                content = content.decode('utf-8')
            except UnicodeDecodeError as e:
                raise DataError('Stream is not valid UTF-8: %s' % e)

        self.lines = content.splitlines(keepends=True)
        while self.lines and not self.lines[-1].strip():
            self.trailer = self.lines.pop() + self.trailer

        if not self.lines:
            raise DataError('Line 1: missing header')

        self.parse_header()
        self.n += 1

        while self.n < len(self.lines):
            self.parse_row()
            self.n += 1

        return self.to_stream()


    def to_stream(self):

        return SensorStream(self.modality, self.timestamps,
                            np.asarray(self.values).reshape(-1, self.modality.channels),
                            text=self.text, header_text=self.lines[0], trailer=self.trailer)


    def parse_header(self):
        line = self._currentline().strip().lstrip('\ufeff').strip()
        if line != self.modality.header:
            raise DataError('Line 1: expected header "%s", found "%s"' % (self.modality.header, line))


    def parse_row(self):
        line = self._currentline()
        parts = line.split(',')

        if len(parts) != self.modality.channels + 1:
            raise DataError('Line %d: %s row needs %d values, found %d' % (self.n + 1,
                                                                           self.modality.name,
                                                                           self.modality.channels,
                                                                           len(parts) - 1))

        try:
            t = int(parts[0])
            v = [float(x) for x in parts[1:]]
        except ValueError:
            raise DataError('Line %d: malformed row "%s"' % (self.n + 1, line))

        if not np.all(np.isfinite(v)):
            raise DataError('Line %d: non-finite value in "%s"' % (self.n + 1, line))
        if self.timestamps and t <= self.timestamps[-1]:
            raise DataError('Line %d: timestamp %d does not follow %d' % (self.n + 1, t,
                                                                          self.timestamps[-1]))
        if self.modality is HEART_RATE and v[0] <= 0:
            raise DataError('Line %d: heart rate must be positive' % (self.n + 1))

        self.timestamps.append(t)
        self.values.append(v)
        self.text.append(self.lines[self.n])


    def _currentline(self):
        line = self.lines[self.n]
        return line.splitlines()[0] if line else line


def parse_stream(content, modality):
    '''Parse raw stream CSV content, see :class:`StreamCsvReader`'''

    return StreamCsvReader()(content, modality)


def read_stream(fpath, modality):
    '''Read a stream CSV file'''

    with open(fpath, 'rb') as fp:
        content = fp.read()

    return parse_stream(content, modality)


def serialize_stream(stream):
    '''Format a stream as CSV

    Streams that were parsed from a file are written back with their
    original header, row text and line terminators, so the output
    equals the source apart from a missing final newline. Other
    streams use the shortest representation that reads back to the
    same floats.

    Parameters
    ----------
    stream : SensorStream
        Stream to serialize

    Returns
    -------
    str
        CSV content with trailing newline

    '''

    if stream.text is not None:
        header = stream.header_text
        if header is None:
            header = stream.modality.header + '\n'
        content = header + ''.join(stream.text) + stream.trailer
        if not content.endswith(('\n', '\r')):
            content += '\n'
        return content

    lines = [stream.modality.header]
    for t, v in zip(stream.timestamps, stream.values):
        lines.append(','.join(['%d' % t] + [repr(float(x)) for x in v]))

    return '\n'.join(lines) + '\n'


def write_stream(stream, fpath):

    with open(fpath, 'w', encoding='utf-8', newline='') as fp:
        fp.write(serialize_stream(stream))


class RecordingBlock:
    '''One on-period of the recording schedule

    Parameters
    ----------
    subject_id : str
        Subject identifier
    start : int
        Block start in milliseconds since epoch
    duration : int
        Block duration in milliseconds
    streams : dict
        Mapping of modality names to streams, one per present modality

    Raises
    ------
    DataError
        If a sample lies outside ``[start, start + duration)``

    '''


    def __init__(self, subject_id, start, duration, streams):

        self.subject_id = subject_id
        self.start = int(start)
        self.duration = int(duration)
        self.streams = dict(streams)

        for name, stream in self.streams.items():
            if len(stream) and (stream.timestamps[0] < self.start or
                                stream.timestamps[-1] >= self.end):
                raise DataError('%s samples outside block [%d, %d)' % (name, self.start, self.end))


    def __repr__(self):

        return 'RecordingBlock(%s, start=%d, %s)' % (
            self.subject_id, self.start,
            ', '.join('%s=%d' % (k, len(v)) for k, v in sorted(self.streams.items())))


    @property
    def end(self):

        return self.start + self.duration


    def has_modality(self, modality):

        name = Modality.from_name(modality).name
        return name in self.streams and len(self.streams[name]) > 0


class Segmentation:
    '''Result of :func:`segment_blocks`

    Behaves as the sequence of recording blocks and additionally
    keeps the off-period samples as anomalies.

    Attributes
    ----------
    blocks : list of RecordingBlock
        Blocks in chronological order
    anomalies : dict
        Mapping of modality names to streams of off-period samples
    origin : int
        Schedule origin in milliseconds
    schedule : 2-tuple
        On and off durations in milliseconds

    '''


    def __init__(self, blocks, anomalies, origin, schedule):

        self.blocks = list(blocks)
        self.anomalies = dict(anomalies)
        self.origin = origin
        self.schedule = tuple(schedule)


    def __iter__(self):

        return iter(self.blocks)


    def __len__(self):

        return len(self.blocks)


    def __getitem__(self, ix):

        return self.blocks[ix]


    @property
    def n_blocked(self):
        '''Number of samples inside blocks, over all modalities'''

        return sum(len(s) for b in self.blocks for s in b.streams.values())


    @property
    def n_anomalies(self):
        '''Number of off-period samples, over all modalities'''

        return sum(len(s) for s in self.anomalies.values())


def segment_blocks(streams, schedule=DEFAULT_SCHEDULE, subject_id=''):
    '''Cut streams into the on-periods of a recording schedule

    The schedule alternates on- and off-periods. Its origin is the
    earliest sample timestamp rounded down to a whole schedule period.
    Every on-period with at least one sample becomes a block; samples
    recorded during off-periods are returned as anomalies.

    Parameters
    ----------
    streams : iterable of SensorStream
        Streams of one subject, at most one per modality
    schedule : 2-tuple, optional
        On and off durations in milliseconds (default: 3 minutes each)
    subject_id : str, optional
        Subject identifier stored in the blocks

    Returns
    -------
    Segmentation
        Sequence of blocks with off-period anomalies

    Raises
    ------
    DataError
        If there are no samples at all or a modality occurs twice
    UsageError
        If the schedule durations are not positive

    '''

    streams = list(streams)
    on, off = [int(x) for x in schedule]
    if on <= 0 or off <= 0:
        raise UsageError('Schedule durations must be positive: %s' % (schedule,))

    names = [s.name for s in streams]
    if len(set(names)) != len(names):
        raise DataError('Duplicate modality in stream set: %s' % ', '.join(names))

    streams = [s for s in streams if len(s)]
    if not streams:
        raise DataError('No samples to segment')

    period = on + off
    origin = (min(s.timestamps[0] for s in streams) // period) * period

    parts = {}
    anomalies = {}
    for stream in streams:
        offset = stream.timestamps - origin
        index = offset // period
        is_on = offset % period < on

        if not np.all(is_on):
            anomalies[stream.name] = stream.select(~is_on)
            logger.warning('%d %s samples of subject "%s" fall in off-periods',
                           np.sum(~is_on), stream.name, subject_id)

        for ix in np.unique(index[is_on]):
            parts.setdefault(int(ix), {})[stream.name] = stream.select(is_on & (index == ix))

    blocks = [RecordingBlock(subject_id, origin + ix * period, on, parts[ix])
              for ix in sorted(parts)]

    logger.info('Segmented subject "%s" into %d blocks', subject_id, len(blocks))

    return Segmentation(blocks, anomalies, int(origin), (on, off))
