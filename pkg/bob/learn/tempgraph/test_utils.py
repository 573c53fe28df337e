#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Helpers shared by the test modules of this package"""

import os
import functools

import pytest

from .events import FeatureSchema, load_events
from .trainer import TrainConfig

TINY_SCHEMA = 'category=categorical:3,value=numerical'


def datafile(name):
  """Returns the path of a file in the test data directory"""
  return os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', name)


def slow(test):
  """Decorator skipping long acceptance runs unless ``TEMPGRAPH_SLOW_TESTS``
  is set in the environment"""

  @functools.wraps(test)
  def wrapper(*args, **kwargs):
    if not os.environ.get('TEMPGRAPH_SLOW_TESTS'):
      pytest.skip("Set TEMPGRAPH_SLOW_TESTS=1 to run the acceptance test '%s'" % test.__name__)
    return test(*args, **kwargs)

  return wrapper


def tiny_schema():
  return FeatureSchema.parse(TINY_SCHEMA)


def tiny_stream():
  """The 12 interactions of ``data/tiny.csv`` over 7 remapped nodes"""
  return load_events(datafile('tiny.csv'), tiny_schema())


def small_config(**overrides):
  """A training configuration small enough for unit tests"""

  values = dict(batch_size=4, epochs=2, learning_rate=1e-3, warmup_epochs=0, d_mem=8, d_emb=8, d_time=4,
      k_nbr=3, num_heads=2, gmm_components=2, d_h0=8)
  values.update(overrides)
  return TrainConfig(**values)
