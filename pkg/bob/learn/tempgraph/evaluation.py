#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Fidelity, originality and link prediction metrics.

Topology is compared on discrete-time snapshots of the two streams (median
absolute error of per-snapshot statistics); edge features are compared with
the Jensen-Shannon distance between histograms sharing their binning;
originality is the fraction of source temporal edges that reappear in the
synthetic stream.
"""

import logging
import itertools
import collections
import dataclasses

import numpy
import networkx
import scipy.spatial.distance
import sklearn.metrics

logger = logging.getLogger(__name__)

SAMPLING_CHOICES = ('inductive', 'standard')


@dataclasses.dataclass
class EvaluationConfig(object):
  """Binning and sampling choices of the evaluation"""

  n_snapshots: int = 10
  n_bins_1d: int = 100
  n_bins_2d: int = 50
  sampling: str = 'inductive'
  seed: int = 0

  def __post_init__(self):
    for name in ('n_snapshots', 'n_bins_1d', 'n_bins_2d'):
      if getattr(self, name) < 1:
        raise ValueError("%s must be positive (got %r)" % (name, getattr(self, name)))
    if self.sampling not in SAMPLING_CHOICES:
      raise ValueError("Sampling '%s' is not known; valid choices are %s" % (self.sampling, SAMPLING_CHOICES))


@dataclasses.dataclass
class SnapshotStats(object):
  """Statistics of one static snapshot"""

  cc: float = 0.0
  md: float = 0.0
  nc: int = 0
  ple: float = 0.0
  wc: int = 0

  METRICS = ('cc', 'md', 'nc', 'ple', 'wc')


def discretize(stream, n_bins):
  """Collapses a stream into ``n_bins`` undirected simple graphs.

  The range ``[t_min, t_max]`` is cut into equal-width intervals, the last
  one closed. Parallel interactions collapse to one edge; self-loops are
  dropped.

  Returns: a list of :py:class:`networkx.Graph`
  """

  if n_bins < 1:
    raise ValueError("The number of snapshots must be positive (got %r)" % n_bins)
  if not len(stream):
    raise ValueError("Cannot discretize an empty stream")

  t = stream.t
  if t[-1] > t[0]:
    edges = numpy.linspace(t[0], t[-1], n_bins + 1)
    index = numpy.clip(numpy.searchsorted(edges, t, side='right') - 1, 0, n_bins - 1)
  else:
    index = numpy.zeros(len(t), dtype=numpy.int64)

  graphs = [networkx.Graph() for _ in range(n_bins)]
  for k, u, v in zip(index.tolist(), stream.src.tolist(), stream.dst.tolist()):
    if u != v:
      graphs[k].add_edge(u, v)
  return graphs


def graph_stats(graph):
  """Computes the :py:class:`SnapshotStats` of a static graph.

  Closeness is the component-scaled form (reachable peers over the summed
  distances, times the reachable fraction of the other nodes). The power-law
  exponent is the continuous maximum-likelihood estimate with a minimum
  degree of 1 and the usual half-unit offset. A graph without nodes yields
  all zeros.
  """

  n = graph.number_of_nodes()
  if not n:
    return SnapshotStats()

  degrees = numpy.array([d for _, d in graph.degree()], dtype=numpy.int64)
  closeness = networkx.closeness_centrality(graph, wf_improved=True)
  positive = degrees[degrees >= 1]
  ple = 0.0
  if len(positive):
    ple = 1.0 + len(positive) / numpy.log(positive / 0.5).sum()

  return SnapshotStats(
      cc=float(numpy.mean(list(closeness.values()))),
      md=2.0 * graph.number_of_edges() / n,
      nc=networkx.number_connected_components(graph),
      ple=float(ple),
      wc=int((degrees * (degrees - 1) // 2).sum()),
  )


def median_abs_error(real_stats, synth_stats):
  """Per-metric median over snapshots of ``|real - synthetic|``.

  Returns: a dictionary metric name -> error
  """

  if len(real_stats) != len(synth_stats):
    raise ValueError("Snapshot sequences differ in length (%d and %d)" % (len(real_stats), len(synth_stats)))
  if not real_stats:
    raise ValueError("Snapshot sequences must not be empty")
  retval = {}
  for metric in SnapshotStats.METRICS:
    real = numpy.array([getattr(s, metric) for s in real_stats], dtype=numpy.float64)
    synth = numpy.array([getattr(s, metric) for s in synth_stats], dtype=numpy.float64)
    retval[metric] = float(numpy.median(numpy.abs(real - synth)))
  return retval


@dataclasses.dataclass
class Histogram(object):
  """Counts over one (1D) or two (2D) sets of bin edges"""

  edges: tuple
  counts: numpy.ndarray

  def __post_init__(self):
    self.edges = tuple(numpy.asarray(e, dtype=numpy.float64) for e in self.edges)
    self.counts = numpy.asarray(self.counts, dtype=numpy.float64)
    if (self.counts < 0).any():
      raise ValueError("Histogram counts must be non-negative")
    if self.counts.shape != tuple(len(e) - 1 for e in self.edges):
      raise ValueError("Counts of shape %s do not match the bin edges" % (self.counts.shape,))

  @property
  def total(self):
    return float(self.counts.sum())

  def pmf(self):
    """Counts normalized to a probability mass function"""
    if self.total <= 0:
      raise ValueError("Cannot normalize an empty histogram")
    return self.counts / self.total

  def same_binning(self, other):
    return len(self.edges) == len(other.edges) and all(numpy.array_equal(a, b) for a, b in zip(self.edges, other.edges))


def js_distance(p, q):
  """Jensen-Shannon distance (base 2, hence in ``[0, 1]``) between two
  histograms with identical binning"""

  if not p.same_binning(q):
    raise ValueError("Histograms must share their binning")
  distance = scipy.spatial.distance.jensenshannon(p.pmf().ravel(), q.pmf().ravel(), base=2)
  return float(numpy.clip(numpy.nan_to_num(distance), 0.0, 1.0))


def _feature_edges(spec, n_bins, value_range):
  if spec.is_categorical:
    return numpy.arange(spec.cardinality + 1, dtype=numpy.float64) - 0.5
  lo, hi = value_range
  if hi <= lo:
    lo, hi = lo - 0.5, hi + 0.5
  return numpy.linspace(lo, hi, n_bins + 1)


def shared_ranges(*streams):
  """Union of the numerical feature ranges of several streams sharing a
  schema (``None`` for categorical features)"""

  streams = [s for s in streams if len(s)]
  if not streams:
    raise ValueError("At least one non-empty stream is needed")
  schema = streams[0].schema
  retval = []
  for k, spec in enumerate(schema):
    if spec.is_categorical:
      retval.append(None)
    else:
      retval.append((float(min(s.features[:, k].min() for s in streams)),
          float(max(s.features[:, k].max() for s in streams))))
  return retval


def feature_histograms(stream, n_bins=100, ranges=None, n_bins_2d=None):
  """Histograms of every feature and of every feature pair.

  Keyword Parameters:

  stream
    The :py:class:`bob.learn.tempgraph.events.EventStream`

  n_bins
    Bins of numerical features in 1D histograms

  ranges
    Numerical ranges per feature, see :py:func:`shared_ranges` (defaults to
    the ranges of ``stream``)

  n_bins_2d
    Bins of numerical features in 2D histograms (defaults to ``n_bins``)

  Returns: a tuple ``(single, pairs)`` of dictionaries keyed by feature name
  and by ``(name, name)``
  """

  schema = stream.schema
  if not schema.n:
    return {}, {}
  n_bins_2d = n_bins_2d or n_bins
  if ranges is None:
    ranges = shared_ranges(stream)

  single = {}
  edges_2d = []
  for k, spec in enumerate(schema):
    edges = _feature_edges(spec, n_bins, ranges[k])
    counts, _ = numpy.histogram(stream.features[:, k], bins=edges)
    single[spec.name] = Histogram((edges,), counts)
    edges_2d.append(_feature_edges(spec, n_bins_2d, ranges[k]))

  pairs = {}
  for a, b in itertools.combinations(range(schema.n), 2):
    counts, _, _ = numpy.histogram2d(stream.features[:, a], stream.features[:, b], bins=[edges_2d[a], edges_2d[b]])
    pairs[(schema[a].name, schema[b].name)] = Histogram((edges_2d[a], edges_2d[b]), counts)
  return single, pairs


def edge_overlap(source, synth):
  """Fraction of the distinct ``(src, dst, t)`` triples of ``source`` that
  also appear in ``synth``"""

  if not len(source):
    raise ValueError("The source stream must not be empty")
  triples = source.triples()
  return len(triples & synth.triples()) / float(len(triples))


def _check_scores(labels, scores):
  labels = numpy.asarray(labels).astype(numpy.int64).reshape(-1)
  scores = numpy.asarray(scores, dtype=numpy.float64).reshape(-1)
  if len(labels) != len(scores):
    raise ValueError("Got %d labels and %d scores" % (len(labels), len(scores)))
  if not numpy.isin(labels, (0, 1)).all():
    raise ValueError("Labels must be 0 or 1")
  return labels, scores


def average_precision(labels, scores):
  """Mean over positives of the precision at their rank.

  Samples are ranked by decreasing score; ties keep the input order.
  """

  labels, scores = _check_scores(labels, scores)
  if not labels.sum():
    raise ValueError("Average precision needs at least one positive label")
  ranked = labels[numpy.argsort(-scores, kind='stable')]
  precision = numpy.cumsum(ranked) / numpy.arange(1, len(ranked) + 1, dtype=numpy.float64)
  return float(precision[ranked == 1].mean())


def auroc(labels, scores):
  """Area under the ROC curve (ties count one half)"""

  labels, scores = _check_scores(labels, scores)
  if labels.min() == labels.max():
    raise ValueError("The area under the ROC curve needs positive and negative labels")
  return float(sklearn.metrics.roc_auc_score(labels, scores))


@dataclasses.dataclass(frozen=True)
class LinkSample(object):
  """A labelled candidate link; ``position`` indexes the positive test
  interaction it was built from"""

  src: int
  dst: int
  t: float
  label: int
  position: int

  @property
  def pair(self):
    return (self.src, self.dst, self.t)


def inductive_negative_sampling(train, test, rng):
  """Pairs every test interaction with a negative of the same source and
  time, whose destination never met that source during training.

  Destinations are drawn uniformly among the destinations of ``train`` and
  ``test``, excluding the source itself and the true destination. Sources
  that met every destination in training are skipped.

  Keyword Parameters:

  train, test
    Streams over a shared node universe

  rng
    A :py:class:`numpy.random.Generator`

  Returns: a list of :py:class:`LinkSample`, each positive followed by its
  negative
  """

  destinations = numpy.unique(numpy.concatenate([train.dst, test.dst]))
  partners = collections.defaultdict(set)
  for s, d in zip(train.src.tolist(), train.dst.tolist()):
    partners[s].add(d)

  allowed = {}
  samples = []
  skipped = 0
  for i, (s, d, t) in enumerate(zip(test.src.tolist(), test.dst.tolist(), test.t.tolist())):
    if s not in allowed:
      excluded = numpy.array(sorted(partners[s] | set([s])), dtype=numpy.int64)
      allowed[s] = numpy.setdiff1d(destinations, excluded)
    choices = allowed[s][allowed[s] != d]
    if not len(choices):
      skipped += 1
      continue
    samples.append(LinkSample(s, d, t, 1, i))
    samples.append(LinkSample(s, int(choices[rng.integers(len(choices))]), t, 0, i))

  if skipped:
    logger.warning("Skipped %d test interactions whose source met every destination in training", skipped)
  return samples


def standard_negative_sampling(test, rng, train=None):
  """Pairs every test interaction with a negative whose destination is drawn
  uniformly among all destinations (those of ``train``, if given, and of
  ``test``) other than the true one and the source"""

  parts = [test.dst] if train is None else [train.dst, test.dst]
  destinations = numpy.unique(numpy.concatenate(parts))

  samples = []
  skipped = 0
  for i, (s, d, t) in enumerate(zip(test.src.tolist(), test.dst.tolist(), test.t.tolist())):
    choices = destinations[(destinations != d) & (destinations != s)]
    if not len(choices):
      skipped += 1
      continue
    samples.append(LinkSample(s, d, t, 1, i))
    samples.append(LinkSample(s, int(choices[rng.integers(len(choices))]), t, 0, i))
  if skipped:
    logger.warning("Skipped %d test interactions without an alternative destination", skipped)
  return samples


def _summary(values):
  values = numpy.array(list(values), dtype=numpy.float64)
  if not len(values):
    return {'mean': None, 'std': None}
  return {'mean': float(values.mean()), 'std': float(values.std())}


def compare_streams(real, synth, config=None):
  """Assembles the fidelity report of a synthetic stream.

  Returns: a JSON-compatible dictionary
  """

  config = config or EvaluationConfig()
  if real.schema != synth.schema:
    raise ValueError("Streams have different schemas ('%s' and '%s')" % (real.schema, synth.schema))
  if not len(real) or not len(synth):
    raise ValueError("Both streams must hold interactions (got %d and %d)" % (len(real), len(synth)))

  real_stats = [graph_stats(g) for g in discretize(real, config.n_snapshots)]
  synth_stats = [graph_stats(g) for g in discretize(synth, config.n_snapshots)]

  ranges = shared_ranges(real, synth)
  real_single, real_pairs = feature_histograms(real, config.n_bins_1d, ranges, config.n_bins_2d)
  synth_single, synth_pairs = feature_histograms(synth, config.n_bins_1d, ranges, config.n_bins_2d)
  single = dict((name, js_distance(h, synth_single[name])) for name, h in real_single.items())
  pairs = dict(('%s|%s' % key, js_distance(h, synth_pairs[key])) for key, h in real_pairs.items())

  report = {
      'interactions': {'real': len(real), 'synthetic': len(synth)},
      'topology': {
          'median_abs_error': median_abs_error(real_stats, synth_stats),
          'real': [dataclasses.asdict(s) for s in real_stats],
          'synthetic': [dataclasses.asdict(s) for s in synth_stats],
      },
      'features': dict([('js', single)] + list(_summary(single.values()).items())),
      'pairs': dict([('js', pairs)] + list(_summary(pairs.values()).items())),
      'overlap': edge_overlap(real, synth),
  }
  logger.info("Topology errors: %s", report['topology']['median_abs_error'])
  return report


def link_prediction_report(labels, scores):
  """Average precision and area under the ROC curve of scored samples"""

  labels, scores = _check_scores(labels, scores)
  return {
      'samples': int(len(labels)),
      'positives': int(labels.sum()),
      'ap': average_precision(labels, scores),
      'auroc': auroc(labels, scores),
  }
