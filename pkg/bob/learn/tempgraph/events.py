#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Continuous-time dynamic graphs as immutable, chronologically ordered
streams of interactions, with CSV ingestion and temporal partitioning.

The interaction files are header-less CSV logs, one interaction per row::

  src,dst,timestamp,state_label,feat_1,...,feat_n

The ``state_label`` column is read and discarded.
"""

import re
import math
import fractions
import logging
import dataclasses

import numpy
import pandas

from .errors import ParseError, OrderingError, SchemaError

logger = logging.getLogger(__name__)

CATEGORICAL = 'categorical'
NUMERICAL = 'numerical'

_KIND_ALIASES = {
    'categorical': CATEGORICAL,
    'cat': CATEGORICAL,
    'numerical': NUMERICAL,
    'num': NUMERICAL,
}

# columns preceding the features in a row
LEADING_COLUMNS = 4

# ulp adjustments tried per delta before a timestamp is declared unreachable
MAX_DELTA_NUDGES = 4


@dataclasses.dataclass(frozen=True)
class FeatureSpec(object):
  """Describes one edge feature: its name, kind and (categorical) cardinality"""

  name: str
  kind: str
  cardinality: int = 0

  def __post_init__(self):
    if self.kind not in (CATEGORICAL, NUMERICAL):
      raise SchemaError("Feature '%s' has unknown kind '%s'; valid choices are %s" % (self.name, self.kind, (CATEGORICAL, NUMERICAL)))
    if self.kind == CATEGORICAL:
      if int(self.cardinality) < 1:
        raise SchemaError("Categorical feature '%s' needs a cardinality of at least 1 (got %s)" % (self.name, self.cardinality))
      object.__setattr__(self, 'cardinality', int(self.cardinality))
    else:
      object.__setattr__(self, 'cardinality', 0)

  @property
  def is_categorical(self):
    return self.kind == CATEGORICAL

  @property
  def width(self):
    """Width of this feature once one-hot (categorical) or raw (numerical) encoded"""
    return self.cardinality if self.is_categorical else 1

  def __str__(self):
    if self.is_categorical:
      return '%s=%s:%d' % (self.name, CATEGORICAL, self.cardinality)
    return '%s=%s' % (self.name, NUMERICAL)


@dataclasses.dataclass(frozen=True)
class FeatureSchema(object):
  """The ordered list of edge features carried by every interaction.

  A schema without features (``n == 0``) is legal.
  """

  features: tuple = ()

  def __post_init__(self):
    features = tuple(self.features)
    names = [f.name for f in features]
    if len(set(names)) != len(names):
      raise SchemaError("Feature names must be unique, got %s" % (names,))
    object.__setattr__(self, 'features', features)

  @classmethod
  def parse(cls, text):
    """Builds a schema from its textual form.

    Descriptors are comma separated; each one is ``[name=]categorical:K`` or
    ``[name=]numerical``, optionally followed by ``*N`` to repeat an unnamed
    descriptor N times (e.g. ``numerical*172``). Unnamed features are called
    ``f<index>``. The empty string is the feature-less schema.
    """

    features = []
    text = (text or '').strip()
    if not text:
      return cls(())
    for token in text.split(','):
      token = token.strip()
      match = re.match(r'^(?:(?P<name>[^=*:]+)=)?(?P<kind>[a-z]+)(?::(?P<card>\d+))?(?:\*(?P<repeat>\d+))?$', token)
      if match is None or match.group('kind') not in _KIND_ALIASES:
        raise SchemaError("Cannot parse feature descriptor '%s'" % token)
      kind = _KIND_ALIASES[match.group('kind')]
      if kind == CATEGORICAL and match.group('card') is None:
        raise SchemaError("Categorical descriptor '%s' lacks a cardinality" % token)
      if kind == NUMERICAL and match.group('card') is not None:
        raise SchemaError("Numerical descriptor '%s' cannot have a cardinality" % token)
      repeat = int(match.group('repeat') or 1)
      if match.group('name') and repeat > 1:
        raise SchemaError("Named descriptor '%s' cannot be repeated" % token)
      for _ in range(repeat):
        name = match.group('name') or 'f%d' % len(features)
        features.append(FeatureSpec(name.strip(), kind, int(match.group('card') or 0)))
    return cls(tuple(features))

  @classmethod
  def from_dict(cls, data):
    return cls(tuple(FeatureSpec(f['name'], f['kind'], f.get('cardinality', 0)) for f in data['features']))

  def to_dict(self):
    return {'features': [dataclasses.asdict(f) for f in self.features]}

  def __str__(self):
    return ','.join(str(f) for f in self.features)

  def __len__(self):
    return len(self.features)

  def __iter__(self):
    return iter(self.features)

  def __getitem__(self, index):
    return self.features[index]

  @property
  def n(self):
    """Number of features"""
    return len(self.features)

  @property
  def names(self):
    return [f.name for f in self.features]

  @property
  def encoded_dim(self):
    """Width of the concatenated one-hot / raw encoding of a feature vector"""
    return sum(f.width for f in self.features)

  def check_values(self, values, lines=None):
    """Verifies a ``(rows, n)`` matrix of feature values against this schema.

    Keyword Parameters:

    values
      The feature matrix, one row per interaction

    lines
      Optional line numbers reported for offending rows (defaults to the
      1-based row index)
    """

    values = numpy.asarray(values, dtype=numpy.float64)
    if values.ndim != 2 or values.shape[1] != self.n:
      raise SchemaError("Expected %d feature values per interaction, got shape %s" % (self.n, values.shape))
    for k, spec in enumerate(self.features):
      column = values[:, k]
      if spec.is_categorical:
        bad = ~(numpy.isfinite(column) & (column == numpy.round(column)) & (column >= 0) & (column < spec.cardinality))
        problem = "categorical feature '%s' must be an integer in [0, %d)" % (spec.name, spec.cardinality)
      else:
        bad = ~numpy.isfinite(column)
        problem = "numerical feature '%s' must be a finite real" % spec.name
      if bad.any():
        row = int(numpy.flatnonzero(bad)[0])
        line = int(lines[row]) if lines is not None else row + 1
        raise SchemaError("line %d: %s, got %r" % (line, problem, column[row]))


@dataclasses.dataclass(frozen=True)
class Interaction(object):
  """One timestamped event between two nodes"""

  src: int
  dst: int
  t: float
  features: tuple = ()


def _frozen(array):
  array.setflags(write=False)
  return array


class EventStream(object):
  """A chronologically ordered, immutable sequence of interactions.

  Interactions are held column-wise (``src``, ``dst``, ``t`` and the
  ``(len, n)`` ``features`` matrix); the arrays are read-only.

  Keyword Parameters:

  src, dst
    Node ids of each interaction, in ``[0, num_nodes)``

  t
    Non-decreasing timestamps (seconds)

  features
    Feature matrix matching ``schema`` (may be omitted when ``n == 0``)

  schema
    The :py:class:`FeatureSchema` of the stream

  num_nodes
    Size of the node universe (defaults to the largest id plus one)

  origin_time
    Reference time of the first inter-event delta (defaults to the first
    timestamp)

  node_labels
    Original identifiers of the dense node ids, when the stream was loaded
    from a file
  """

  def __init__(self, src, dst, t, features=None, schema=FeatureSchema(), num_nodes=None,
      origin_time=None, node_labels=None, validate=True):

    self.schema = schema
    src = numpy.array(src, dtype=numpy.int64).reshape(-1)
    dst = numpy.array(dst, dtype=numpy.int64).reshape(-1)
    t = numpy.array(t, dtype=numpy.float64).reshape(-1)
    if not (len(src) == len(dst) == len(t)):
      raise ValueError("src, dst and t must have the same length (got %d, %d, %d)" % (len(src), len(dst), len(t)))
    if features is None:
      features = numpy.zeros((len(t), schema.n), dtype=numpy.float64)
    else:
      features = numpy.array(features, dtype=numpy.float64).reshape(len(t), schema.n)

    if num_nodes is None:
      num_nodes = int(max(src.max(), dst.max())) + 1 if len(src) else 1
    if origin_time is None:
      origin_time = float(t[0]) if len(t) else 0.0

    self.src = _frozen(src)
    self.dst = _frozen(dst)
    self.t = _frozen(t)
    self.features = _frozen(features)
    self.num_nodes = int(num_nodes)
    self.origin_time = float(origin_time)
    self.node_labels = tuple(node_labels) if node_labels is not None else None

    if validate:
      self.validate()

  def validate(self):
    """Checks every stream invariant, raising on the first violation"""

    if self.num_nodes < 1:
      raise ValueError("The node universe must hold at least one node (got %d)" % self.num_nodes)
    if self.node_labels is not None and len(self.node_labels) != self.num_nodes:
      raise ValueError("Got %d node labels for %d nodes" % (len(self.node_labels), self.num_nodes))
    if not len(self):
      return
    for name, ids in (('src', self.src), ('dst', self.dst)):
      bad = (ids < 0) | (ids >= self.num_nodes)
      if bad.any():
        row = int(numpy.flatnonzero(bad)[0])
        raise ValueError("Interaction %d: %s id %d is outside the node universe [0, %d)" % (row + 1, name, ids[row], self.num_nodes))
    if not numpy.isfinite(self.t).all() or (self.t < 0).any():
      raise ValueError("Timestamps must be finite non-negative reals")
    decreasing = numpy.flatnonzero(numpy.diff(self.t) < 0)
    if len(decreasing):
      row = int(decreasing[0]) + 1
      raise OrderingError("timestamp %r precedes the previous timestamp %r" % (self.t[row], self.t[row - 1]), line=row + 1)
    if self.origin_time > self.t[0]:
      raise OrderingError("origin time %r is after the first timestamp %r" % (self.origin_time, self.t[0]))
    self.schema.check_values(self.features)

  def __len__(self):
    return len(self.t)

  def __getitem__(self, index):
    if isinstance(index, slice):
      start, stop, step = index.indices(len(self))
      if step != 1:
        raise ValueError("Streams can only be sliced contiguously")
      return self.slice(start, stop)
    if index < 0:
      index += len(self)
    return Interaction(int(self.src[index]), int(self.dst[index]), float(self.t[index]),
        tuple(float(v) for v in self.features[index]))

  def __iter__(self):
    for i in range(len(self)):
      yield self[i]

  def __repr__(self):
    return "EventStream(%d interactions, %d nodes, schema='%s')" % (len(self), self.num_nodes, self.schema)

  def __eq__(self, other):
    if not isinstance(other, EventStream):
      return NotImplemented
    return (self.schema == other.schema and self.num_nodes == other.num_nodes and
        self.origin_time == other.origin_time and
        numpy.array_equal(self.src, other.src) and numpy.array_equal(self.dst, other.dst) and
        numpy.array_equal(self.t, other.t) and numpy.array_equal(self.features, other.features))

  __hash__ = None

  @property
  def interactions(self):
    """All interactions as a list of :py:class:`Interaction`"""
    return list(self)

  @property
  def timestamps(self):
    return self.t

  def deltas(self):
    """Shortcut for :py:func:`inter_event_deltas`"""
    return inter_event_deltas(self)

  def triples(self):
    """The set of ``(src, dst, t)`` triples of this stream"""
    return set(zip(self.src.tolist(), self.dst.tolist(), self.t.tolist()))

  def slice(self, start, stop, origin_time=None):
    """Returns interactions ``[start, stop)`` as a new stream sharing schema
    and node universe. The origin defaults to the timestamp preceding
    ``start`` so that deltas continue the global sequence."""

    if origin_time is None:
      origin_time = float(self.t[start - 1]) if start > 0 else self.origin_time
    return EventStream(self.src[start:stop], self.dst[start:stop], self.t[start:stop],
        self.features[start:stop], self.schema, self.num_nodes, origin_time,
        self.node_labels, validate=False)

  @classmethod
  def concatenate(cls, parts):
    """Joins streams sharing schema and node universe; the origin of the
    first part is kept"""

    parts = list(parts)
    if not parts:
      raise ValueError("Cannot concatenate an empty list of streams")
    first = parts[0]
    for part in parts[1:]:
      if part.schema != first.schema or part.num_nodes != first.num_nodes:
        raise ValueError("Only streams with identical schema and node universe can be concatenated")
    return cls(numpy.concatenate([p.src for p in parts]), numpy.concatenate([p.dst for p in parts]),
        numpy.concatenate([p.t for p in parts]), numpy.concatenate([p.features for p in parts]),
        first.schema, first.num_nodes, first.origin_time, first.node_labels)


def _number(token):
  try:
    return float(token)
  except ValueError:
    return numpy.nan


def _line_of(message):
  match = re.search(r'line (\d+)', str(message))
  return int(match.group(1)) if match else None


def load_events(path, schema, origin_time=None, bipartite=False, keep_ids=False, num_nodes=None):
  """Loads an interaction log.

  Node identifiers are remapped to the dense range ``[0, num_nodes)`` in order
  of first appearance (scanning each row source first); the original labels
  are kept in :py:attr:`EventStream.node_labels`.

  Keyword Parameters:

  path
    The CSV file to read

  schema
    The :py:class:`FeatureSchema` describing the trailing feature columns

  origin_time
    Reference of the first inter-event delta (defaults to the first timestamp)

  bipartite
    If set, source and destination columns are independent id namespaces and
    labels are recorded as ``src:<id>`` and ``dst:<id>``

  keep_ids
    If set, the ids of the file are already dense and are used verbatim (as
    in files written by :py:func:`write_events`)

  num_nodes
    Size of the node universe when ``keep_ids`` is set (defaults to the
    largest id plus one)

  Returns: an :py:class:`EventStream`
  """

  if keep_ids and bipartite:
    raise ValueError("Dense ids cannot be combined with bipartite namespaces")
  expected = LEADING_COLUMNS + schema.n
  try:
    frame = pandas.read_csv(path, header=None, dtype=str, skip_blank_lines=False,
        keep_default_na=False, na_values=[''])
  except pandas.errors.EmptyDataError:
    raise ParseError("file '%s' holds no interaction rows" % path)
  except pandas.errors.ParserError as e:
    raise ParseError(str(e).strip(), line=_line_of(e))

  frame = frame.dropna(how='all')
  if not len(frame):
    raise ParseError("file '%s' holds no interaction rows" % path)
  if frame.shape[1] != expected:
    raise SchemaError("file '%s' has %d fields per row, expected %d (4 + %d features)" % (path, frame.shape[1], expected, schema.n))
  lines = frame.index.to_numpy() + 1

  missing = frame.isna().to_numpy()
  if missing.any():
    row, column = numpy.argwhere(missing)[0]
    raise ParseError("expected %d fields, field %d is missing" % (expected, column + 1), line=int(lines[row]))

  # exact round trip of the values written by write_events
  numbers = frame.apply(lambda column: column.str.strip().map(_number))
  unparsed = numbers.isna().to_numpy()
  if unparsed.any():
    row, column = numpy.argwhere(unparsed)[0]
    raise ParseError("field %d (%r) is not a number" % (column + 1, frame.iat[row, column]), line=int(lines[row]))
  values = numbers.to_numpy(dtype=numpy.float64)

  ids = values[:, :2]
  bad = ~numpy.isfinite(ids) | (ids < 0) | (ids != numpy.floor(ids))
  if bad.any():
    row = int(numpy.argwhere(bad)[0][0])
    raise ParseError("node ids must be non-negative integers", line=int(lines[row]))
  t = values[:, 2]
  if (t < 0).any() or not numpy.isfinite(t).all():
    row = int(numpy.flatnonzero((t < 0) | ~numpy.isfinite(t))[0])
    raise ParseError("timestamps must be finite non-negative reals", line=int(lines[row]))
  decreasing = numpy.flatnonzero(numpy.diff(t) < 0)
  if len(decreasing):
    row = int(decreasing[0]) + 1
    raise OrderingError("timestamp %r precedes the previous timestamp %r" % (t[row], t[row - 1]), line=int(lines[row]))
  features = values[:, LEADING_COLUMNS:]
  schema.check_values(features, lines=lines)

  if keep_ids:
    ids = ids.astype(numpy.int64)
    if num_nodes is not None and len(ids) and ids.max() >= num_nodes:
      row = int(numpy.argwhere(ids >= num_nodes)[0][0])
      raise ParseError("node id %d is outside the node universe [0, %d)" % (ids[row].max(), num_nodes), line=int(lines[row]))
    stream = EventStream(ids[:, 0], ids[:, 1], t, features, schema, num_nodes, origin_time)
    logger.info("Loaded %d interactions over %d nodes from '%s'", len(stream), stream.num_nodes, path)
    return stream

  src_labels = ['%d' % k for k in ids[:, 0].astype(numpy.int64)]
  dst_labels = ['%d' % k for k in ids[:, 1].astype(numpy.int64)]
  if bipartite:
    src_labels = ['src:' + k for k in src_labels]
    dst_labels = ['dst:' + k for k in dst_labels]
  interleaved = numpy.column_stack([src_labels, dst_labels]).ravel()
  labels = pandas.unique(interleaved)
  index = pandas.Index(labels)

  stream = EventStream(index.get_indexer(src_labels), index.get_indexer(dst_labels), t, features,
      schema, len(labels), origin_time, [str(k) for k in labels])
  logger.info("Loaded %d interactions over %d nodes from '%s'", len(stream), stream.num_nodes, path)
  return stream


def write_events(stream, path):
  """Writes a stream in the CSV format read by :py:func:`load_events`.

  Dense node ids are written; the state label column is written as 0.
  """

  columns = {
      'src': stream.src,
      'dst': stream.dst,
      't': stream.t,
      'label': numpy.zeros(len(stream), dtype=numpy.int64),
  }
  for k, spec in enumerate(stream.schema):
    column = stream.features[:, k]
    columns['feature_%d' % k] = column.astype(numpy.int64) if spec.is_categorical else column
  pandas.DataFrame(columns).to_csv(path, header=False, index=False, lineterminator='\n')
  logger.info("Wrote %d interactions to '%s'", len(stream), path)


def _exact(fraction):
  """The decimal value of ``fraction`` as an exact rational (0.29 is 29/100)"""
  return fractions.Fraction(repr(float(fraction)))


def chronological_split(stream, f_train=0.70, f_val=0.15):
  """Splits a stream into consecutive train, validation and test partitions.

  Train holds the first ``floor(f_train * len)`` interactions, validation the
  next ``floor((f_train + f_val) * len) - floor(f_train * len)`` and test the
  remainder. Each partition's origin is the last timestamp of the preceding
  one.

  Returns: a tuple ``(train, val, test)`` of :py:class:`EventStream`
  """

  if not len(stream):
    raise ValueError("Cannot split an empty stream")
  if not (f_train > 0 and f_val >= 0 and f_train + f_val < 1):
    raise ValueError("Split fractions must satisfy 0 < f_train, 0 <= f_val and f_train + f_val < 1 (got %r, %r)" % (f_train, f_val))

  size = len(stream)
  train_end = math.floor(_exact(f_train) * size)
  val_end = math.floor((_exact(f_train) + _exact(f_val)) * size)
  return (stream.slice(0, train_end), stream.slice(train_end, val_end), stream.slice(val_end, size))


def inter_event_deltas(stream):
  """Returns the time elapsed since the globally previous interaction.

  The first delta is measured from the stream's origin time. Each delta is
  chosen so that adding it to the previous timestamp in floating point gives
  the next timestamp exactly, hence :py:func:`reconstruct_timestamps`
  reproduces the timestamps bit for bit. Rounding ties can make a timestamp
  unreachable from a much smaller predecessor (``1.0`` then ``1e16 + 2``);
  these are counted in a warning.
  """

  if not len(stream):
    raise ValueError("Inter-event deltas need a non-empty stream")
  t = stream.t
  previous = numpy.concatenate([[stream.origin_time], t[:-1]])
  deltas = t - previous
  unreachable = 0
  for i in numpy.flatnonzero(previous + deltas != t):
    # the rounded difference misses by an ulp when t[i] > 2 * previous[i]
    for _ in range(MAX_DELTA_NUDGES):
      total = previous[i] + deltas[i]
      if total == t[i]:
        break
      deltas[i] = numpy.nextafter(deltas[i], numpy.inf if total < t[i] else -numpy.inf)
    else:
      unreachable += 1
  if unreachable:
    logger.warning("%d timestamps cannot be reached exactly by adding a delta to their predecessor", unreachable)
  return deltas


def reconstruct_timestamps(deltas, origin_time=0.0):
  """Inverse of :py:func:`inter_event_deltas`: a running sum seeded with the origin"""

  deltas = numpy.asarray(deltas, dtype=numpy.float64)
  return numpy.cumsum(numpy.concatenate([[origin_time], deltas]))[1:]
