#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Tests for the evaluation metrics"""

import math
import collections

import numpy
import networkx
import pytest

from .events import EventStream, FeatureSchema
from .evaluation import EvaluationConfig, SnapshotStats, Histogram, discretize, graph_stats, \
    median_abs_error, js_distance, feature_histograms, shared_ranges, edge_overlap, \
    average_precision, auroc, inductive_negative_sampling, standard_negative_sampling, \
    compare_streams, link_prediction_report
from .test_utils import tiny_stream


def _stream(pairs, t=None, num_nodes=None):
  t = t if t is not None else [float(k) for k in range(len(pairs))]
  return EventStream([p[0] for p in pairs], [p[1] for p in pairs], t, num_nodes=num_nodes)


def _hist(counts):
  return Histogram((numpy.arange(len(counts) + 1, dtype=numpy.float64),), counts)


def test_discretize():

  stream = _stream([(0, 1), (1, 2), (2, 3)], [0.1, 0.5, 0.9])
  graphs = discretize(stream, 2)
  assert [g.number_of_edges() for g in graphs] == [1, 2]

  whole = discretize(stream, 1)
  assert len(whole) == 1 and whole[0].number_of_edges() == 3

  single = discretize(_stream([(0, 1)], [4.0]), 5)
  assert len(single) == 5
  assert sum(g.number_of_edges() for g in single) == 1

  # parallel interactions collapse, self-loops are dropped
  collapsed = discretize(_stream([(0, 1), (1, 0), (0, 1), (2, 2)]), 1)
  assert collapsed[0].number_of_edges() == 1
  assert not collapsed[0].has_node(2)

  with pytest.raises(ValueError):
    discretize(stream, 0)


def test_triangle_and_path():

  triangle = graph_stats(networkx.complete_graph(3))
  assert triangle.md == 2.0
  assert triangle.wc == 3
  assert triangle.nc == 1
  assert abs(triangle.cc - 1.0) < 1e-12
  assert abs(triangle.ple - (1.0 + 1.0 / math.log(4))) < 1e-12

  path = graph_stats(networkx.path_graph(3))
  assert abs(path.md - 4.0 / 3) < 1e-12
  assert path.wc == 1
  assert path.nc == 1
  assert abs(path.cc - 7.0 / 9) < 1e-12

  disjoint = graph_stats(networkx.Graph([(0, 1), (2, 3)]))
  assert disjoint.nc == 2
  assert disjoint.md == 1.0
  assert disjoint.wc == 0

  assert graph_stats(networkx.Graph()) == SnapshotStats()


def _oracle(n, edges):
  """Straightforward re-evaluation of the snapshot statistics"""

  neighbors = collections.defaultdict(set)
  for u, v in edges:
    neighbors[u].add(v)
    neighbors[v].add(u)
  nodes = sorted(neighbors)

  def distances(source):
    found = {source: 0}
    frontier = [source]
    while frontier:
      following = []
      for u in frontier:
        for v in neighbors[u]:
          if v not in found:
            found[v] = found[u] + 1
            following.append(v)
      frontier = following
    return found

  closeness = []
  seen = set()
  components = 0
  for u in nodes:
    found = distances(u)
    reach = len(found) - 1
    closeness.append((reach / sum(found.values())) * (reach / (len(nodes) - 1)) if reach else 0.0)
    if u not in seen:
      components += 1
      seen.update(found)

  degrees = [len(neighbors[u]) for u in nodes]
  return {
      'cc': sum(closeness) / len(nodes),
      'md': sum(degrees) / len(nodes),
      'nc': components,
      'wc': sum(d * (d - 1) // 2 for d in degrees),
      'ple': 1.0 + len(degrees) / sum(math.log(d / 0.5) for d in degrees),
  }


def test_random_graphs_against_oracle():

  rng = numpy.random.default_rng(11)
  for _ in range(50):
    n = int(rng.integers(2, 31))
    size = int(rng.integers(1, min(60, n * (n - 1) // 2) + 1))
    pairs = set()
    while len(pairs) < size:
      u, v = rng.integers(n, size=2).tolist()
      if u != v:
        pairs.add((min(u, v), max(u, v)))
    graph = networkx.Graph(sorted(pairs))
    stats = graph_stats(graph)
    expected = _oracle(graph.number_of_nodes(), pairs)
    for metric in SnapshotStats.METRICS:
      assert abs(getattr(stats, metric) - expected[metric]) < 1e-9, metric


def test_median_abs_error():

  real = [SnapshotStats(md=k) for k in (1.0, 2.0, 3.0)]
  synth = [SnapshotStats(md=k) for k in (2.0, 2.0, 5.0)]
  errors = median_abs_error(real, synth)
  assert errors['md'] == 1.0
  assert errors['cc'] == 0.0
  assert set(errors) == set(SnapshotStats.METRICS)

  assert all(v == 0.0 for v in median_abs_error(real, real).values())
  assert median_abs_error([SnapshotStats(wc=3)], [SnapshotStats(wc=7)])['wc'] == 4.0
  with pytest.raises(ValueError):
    median_abs_error(real, synth[:2])


def test_js_distance():

  assert js_distance(_hist([2, 5, 1]), _hist([4, 10, 2])) == 0.0
  assert abs(js_distance(_hist([1, 0]), _hist([0, 1])) - 1.0) < 1e-9
  assert abs(js_distance(_hist([1, 0]), _hist([0.5, 0.5])) - math.sqrt(0.31127812445913283)) < 1e-9
  assert abs(js_distance(_hist([1, 0]), _hist([0.5, 0.5])) - 0.5579) < 1e-4

  with pytest.raises(ValueError):
    js_distance(_hist([1, 0]), _hist([1, 0, 0]))
  with pytest.raises(ValueError):
    Histogram((numpy.arange(3.0),), [1, -1])
  with pytest.raises(ValueError):
    _hist([0, 0]).pmf()


def test_feature_histograms():

  schema = FeatureSchema.parse('kind=categorical:2,value=numerical')
  stream = EventStream([0] * 4, [1] * 4, [0.0, 1.0, 2.0, 3.0], [[0, 0.0], [0, 1.0], [1, 1.0], [0, 0.25]], schema)

  single, pairs = feature_histograms(stream, n_bins=2)
  assert list(single['kind'].counts) == [3, 1]
  assert list(single['value'].counts) == [2, 2]
  assert list(pairs) == [('kind', 'value')]
  joint = pairs[('kind', 'value')]
  assert joint.counts.shape == (2, 2)
  assert numpy.array_equal(joint.counts.sum(axis=1), single['kind'].counts)
  assert numpy.array_equal(joint.counts.sum(axis=0), single['value'].counts)

  numerical = FeatureSchema.parse('numerical')
  two = EventStream([0, 0], [1, 1], [0.0, 1.0], [[0.0], [1.0]], numerical)
  assert list(feature_histograms(two, n_bins=2)[0]['f0'].counts) == [1, 1]

  assert feature_histograms(_stream([(0, 1)]), 10) == ({}, {})

  # ranges cover both streams
  wide = EventStream([0], [1], [0.0], [[5.0]], numerical)
  assert shared_ranges(two, wide) == [(0.0, 5.0)]


def test_edge_overlap():

  source = _stream([(0, 1), (1, 2), (2, 3), (3, 0)])
  assert edge_overlap(source, source) == 1.0
  assert edge_overlap(source, _stream([(1, 0), (2, 1)], [10.0, 11.0])) == 0.0
  assert edge_overlap(source, _stream([(0, 1), (2, 3), (1, 3)], [0.0, 2.0, 3.0])) == 0.5


def test_ranking_metrics():

  labels = [1, 0, 1, 0]
  scores = [0.9, 0.8, 0.7, 0.6]
  assert abs(average_precision(labels, scores) - (1.0 + 2.0 / 3) / 2) < 1e-12
  assert average_precision([0, 1], [0.9, 0.1]) == 0.5
  assert average_precision([1, 1, 0], [3.0, 2.0, 1.0]) == 1.0
  with pytest.raises(ValueError):
    average_precision([0, 0], [0.1, 0.2])

  assert abs(auroc(labels, scores) - 0.75) < 1e-12
  assert auroc([1, 1, 0], [3.0, 2.0, 1.0]) == 1.0
  assert auroc([1, 0, 1, 0], [0.5] * 4) == 0.5
  with pytest.raises(ValueError):
    auroc([1, 1], [0.1, 0.2])
  with pytest.raises(ValueError):
    auroc([1, 0], [0.1])

  report = link_prediction_report(labels, scores)
  assert report['samples'] == 4 and report['positives'] == 2
  assert abs(report['auroc'] - 0.75) < 1e-12


def _ap_by_definition(labels, scores):
  order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
  precisions = []
  hits = 0
  for rank, i in enumerate(order, 1):
    if labels[i]:
      hits += 1
      precisions.append(hits / rank)
  return sum(precisions) / len(precisions)


def _auroc_by_definition(labels, scores):
  positives = [s for label, s in zip(labels, scores) if label]
  negatives = [s for label, s in zip(labels, scores) if not label]
  wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in positives for q in negatives)
  return wins / (len(positives) * len(negatives))


def test_ranking_metrics_against_definitions():

  rng = numpy.random.default_rng(5)
  for _ in range(200):
    size = int(rng.integers(2, 21))
    labels = rng.integers(2, size=size).tolist()
    labels[0], labels[-1] = 1, 0
    # few distinct values, so ties are common
    scores = (rng.integers(4, size=size) / 4.0).tolist()
    assert abs(average_precision(labels, scores) - _ap_by_definition(labels, scores)) < 1e-12
    assert abs(auroc(labels, scores) - _auroc_by_definition(labels, scores)) < 1e-12


def test_inductive_negatives():

  train = _stream([(0, 1), (0, 2), (3, 4), (5, 1)], num_nodes=8)
  test = EventStream([0, 3, 0, 6], [1, 5, 7, 0], [10.0, 11.0, 12.0, 13.0], num_nodes=8)
  samples = inductive_negative_sampling(train, test, numpy.random.default_rng(0))

  positives = samples[0::2]
  negatives = samples[1::2]
  assert [s.label for s in positives] == [1] * len(positives)
  assert [s.label for s in negatives] == [0] * len(negatives)
  assert [s.position for s in positives] == [0, 1, 2, 3]
  destinations = {0, 1, 2, 4, 5, 7}
  partners = {0: {1, 2}, 3: {4}, 5: {1}}
  for positive, negative in zip(positives, negatives):
    assert (negative.src, negative.t, negative.position) == (positive.src, positive.t, positive.position)
    assert negative.dst in destinations
    assert negative.dst not in (positive.src, positive.dst)
    assert negative.dst not in partners.get(positive.src, set())
  assert negatives[1].dst != 4

  again = inductive_negative_sampling(train, test, numpy.random.default_rng(0))
  assert again == samples


def test_inductive_skips_saturated_sources():

  # source 0 met every destination during training
  train = _stream([(0, 1), (0, 2)], num_nodes=3)
  test = EventStream([0, 1], [1, 0], [5.0, 6.0], num_nodes=3)
  samples = inductive_negative_sampling(train, test, numpy.random.default_rng(1))
  assert [(s.src, s.label) for s in samples] == [(1, 1), (1, 0)]
  assert samples[1].dst == 2


def test_standard_negatives():

  test = EventStream([0, 1, 2], [3, 4, 5], [1.0, 2.0, 3.0], num_nodes=6)
  samples = standard_negative_sampling(test, numpy.random.default_rng(0))
  assert len(samples) == 6
  for positive, negative in zip(samples[0::2], samples[1::2]):
    assert negative.dst in (3, 4, 5)
    assert negative.dst != positive.dst
    assert negative.pair[0] == positive.src

  # destinations seen only in training are candidates too
  train = _stream([(0, 9)], num_nodes=10)
  test = EventStream([0, 1, 2], [3, 4, 5], [1.0, 2.0, 3.0], num_nodes=10)
  drawn = set()
  for seed in range(20):
    drawn.update(s.dst for s in standard_negative_sampling(test, numpy.random.default_rng(seed), train)[1::2])
  assert drawn == {3, 4, 5, 9}


def test_compare_streams():

  stream = tiny_stream()
  config = EvaluationConfig(n_snapshots=3, n_bins_1d=10, n_bins_2d=5)
  report = compare_streams(stream, stream, config)

  assert report['interactions'] == {'real': 12, 'synthetic': 12}
  assert set(report['topology']['median_abs_error']) == set(SnapshotStats.METRICS)
  assert all(v == 0.0 for v in report['topology']['median_abs_error'].values())
  assert len(report['topology']['real']) == 3
  assert report['features']['js'] == {'category': 0.0, 'value': 0.0}
  assert report['features']['mean'] == 0.0
  assert report['pairs']['js'] == {'category|value': 0.0}
  assert report['overlap'] == 1.0

  with pytest.raises(ValueError):
    compare_streams(stream, _stream([(0, 1)]), config)
  with pytest.raises(ValueError):
    EvaluationConfig(sampling='random')
