#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Tests for the planted-preference toy process"""

import math

import numpy
import pytest

from .events import load_events, chronological_split
from .evaluation import EvaluationConfig, compare_streams, edge_overlap, inductive_negative_sampling, \
    link_prediction_report
from .generator import GenerationConfig, generate, replay, score_stream
from .network import model_from_checkpoint
from .toy import ToyConfig, make_toy
from .trainer import TrainConfig, train
from .test_utils import slow


def test_config_validation():

  with pytest.raises(ValueError):
    ToyConfig(n_events=0)
  with pytest.raises(ValueError):
    ToyConfig(rate=0.0)
  with pytest.raises(ValueError):
    ToyConfig(preference=1.5)
  with pytest.raises(ValueError):
    ToyConfig(category_pmfs=((0.5, 0.6), (0.2, 0.8)))
  with pytest.raises(ValueError):
    ToyConfig(category_pmfs=((0.5, 0.5), (0.2, 0.3, 0.5)))
  with pytest.raises(ValueError):
    ToyConfig(gmm_stds=(0.5, 0.0))
  with pytest.raises(ValueError):
    ToyConfig(gmm_means=(0.0,))

  config = ToyConfig(n_src_nodes=4, n_dst_nodes=6)
  assert str(config.schema) == 'category=categorical:2,value=numerical'
  assert [list(k) for k in config.blocks] == [[4, 5, 6], [7, 8, 9]]


def test_thousand_events(tmp_path):

  path = str(tmp_path / 'toy' / 'toy.csv')
  config = ToyConfig(n_events=1000)
  stream = make_toy(config, path)

  assert len(stream) == 1000
  assert (numpy.diff(stream.t) >= 0).all()
  assert stream.num_nodes == 50
  assert stream.origin_time == 0.0
  assert (stream.src < 20).all()
  assert ((stream.dst >= 20) & (stream.dst < 50)).all()

  assert len(open(path).read().splitlines()) == 1000
  assert load_events(path, config.schema, origin_time=0.0, keep_ids=True, num_nodes=50) == stream


def test_same_seed_same_file(tmp_path):

  config = ToyConfig(n_events=300, seed=5)
  paths = [str(tmp_path / ('%d.csv' % k)) for k in range(3)]
  make_toy(config, paths[0])
  make_toy(config, paths[1])
  make_toy(ToyConfig(n_events=300, seed=6), paths[2])

  data = [open(k, 'rb').read() for k in paths]
  assert data[0] == data[1]
  assert data[0] != data[2]


def test_planted_structure():

  config = ToyConfig(n_events=5000)
  stream = make_toy(config)
  blocks = config.blocks

  preferred = numpy.array([numpy.isin(d, blocks[s % 2]) for s, d in zip(stream.src, stream.dst)])
  assert abs(preferred.mean() - 0.9) < 0.02

  group = numpy.isin(stream.dst, blocks[1]).astype(int)
  category = stream.features[:, 0]
  assert abs((category[group == 0] == 0).mean() - 0.7) < 0.04
  assert abs((category[group == 1] == 0).mean() - 0.2) < 0.04

  value = stream.features[:, 1]
  assert abs((value > 0).mean() - 0.5) < 0.03
  assert abs(numpy.abs(value).mean() - 2.0) < 0.05


def test_inter_event_times():

  stream = make_toy(ToyConfig(n_events=100000, rate=2.0, seed=3))
  deltas = stream.deltas()
  # exponential: the standard error of the mean equals mean / sqrt(n)
  mean = 0.5
  assert abs(deltas.mean() - mean) < 4 * mean / math.sqrt(len(deltas))


@slow
def test_toy_acceptance():

  toy = make_toy(ToyConfig())
  checkpoint = train(toy, TrainConfig(epochs=20))
  assert checkpoint.history[-1] <= 0.7 * checkpoint.history[0], checkpoint.history

  synth = generate(checkpoint, GenerationConfig(num_interactions=5000, seed=1))
  report = compare_streams(toy, synth, EvaluationConfig(n_snapshots=10))
  assert all(v < 0.1 for v in report['features']['js'].values()), report['features']['js']
  assert all(v < 0.2 for v in report['pairs']['js'].values()), report['pairs']['js']
  assert edge_overlap(toy, synth) == 0.0


@slow
def test_toy_topology_and_link_prediction():

  train_part, val, test = chronological_split(make_toy(ToyConfig()))
  checkpoint = train(train_part, TrainConfig(epochs=20))

  # as many interactions as the held-out partition it is compared with
  synth = generate(checkpoint, GenerationConfig(num_interactions=len(test), seed=1))
  report = compare_streams(test, synth, EvaluationConfig(n_snapshots=10))
  errors = report['topology']['median_abs_error']
  mean_degree = numpy.mean([s['md'] for s in report['topology']['real']])
  assert errors['md'] < 0.2 * mean_degree, (errors, mean_degree)
  assert errors['nc'] <= 2, errors

  model = model_from_checkpoint(checkpoint)
  states = replay(model, checkpoint.node_states.clone(), val)
  samples = inductive_negative_sampling(train_part, test, numpy.random.default_rng(0))
  labels, scores = score_stream(checkpoint, states, test, samples, model=model)
  report = link_prediction_report(labels, scores)
  assert report['ap'] >= 0.85, report
  assert report['auroc'] >= 0.85, report
