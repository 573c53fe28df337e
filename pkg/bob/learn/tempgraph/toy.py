#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""A synthetic bipartite interaction process with known ground truth.

Sources are drawn uniformly; destinations are split into blocks and every
source prefers one block. Inter-event times are exponential. Each
interaction carries a categorical feature whose distribution depends on the
block of the destination and a numerical feature drawn from a Gaussian
mixture.
"""

import logging
import dataclasses

import numpy

from .events import EventStream, FeatureSchema, FeatureSpec, write_events, reconstruct_timestamps
from .utils import numpy_generator, ensure_parent

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class ToyConfig(object):
  """Parameters of the toy process.

  Keyword Parameters:

  n_src_nodes, n_dst_nodes
    Sizes of the source and destination groups (ids ``[0, n_src_nodes)``
    are sources, the following ``n_dst_nodes`` ids destinations)

  n_events
    Number of interactions

  rate
    Rate of the exponential inter-event times

  category_pmfs
    One categorical distribution per destination block

  gmm_means, gmm_stds, gmm_weights
    The Gaussian mixture of the numerical feature

  preference
    Probability that a source picks a destination in its preferred block

  seed
    Seed of the ``data`` random stream
  """

  n_src_nodes: int = 20
  n_dst_nodes: int = 30
  n_events: int = 20000
  rate: float = 1.0
  category_pmfs: tuple = ((0.7, 0.3), (0.2, 0.8))
  gmm_means: tuple = (-2.0, 2.0)
  gmm_stds: tuple = (0.5, 0.5)
  gmm_weights: tuple = (0.5, 0.5)
  preference: float = 0.9
  seed: int = 0

  def __post_init__(self):
    self.category_pmfs = tuple(tuple(float(p) for p in pmf) for pmf in self.category_pmfs)
    self.gmm_means = tuple(float(k) for k in self.gmm_means)
    self.gmm_stds = tuple(float(k) for k in self.gmm_stds)
    self.gmm_weights = tuple(float(k) for k in self.gmm_weights)

    for name in ('n_src_nodes', 'n_dst_nodes', 'n_events'):
      if getattr(self, name) < 1:
        raise ValueError("%s must be positive (got %r)" % (name, getattr(self, name)))
    if not self.rate > 0:
      raise ValueError("rate must be positive (got %r)" % self.rate)
    if not 0 <= self.preference <= 1:
      raise ValueError("preference must lie in [0, 1] (got %r)" % self.preference)
    if not self.category_pmfs or len(self.category_pmfs) > self.n_dst_nodes:
      raise ValueError("Expected between 1 and %d category distributions (got %d)" % (self.n_dst_nodes, len(self.category_pmfs)))
    if len(set(len(pmf) for pmf in self.category_pmfs)) != 1:
      raise ValueError("All category distributions must have the same number of categories")
    for pmf in self.category_pmfs + (self.gmm_weights,):
      if min(pmf) < 0 or abs(sum(pmf) - 1) > 1e-9:
        raise ValueError("%s is not a probability mass function" % (pmf,))
    if not (len(self.gmm_means) == len(self.gmm_stds) == len(self.gmm_weights) >= 1):
      raise ValueError("The mixture needs as many means, stds and weights (got %d, %d, %d)" % (len(self.gmm_means), len(self.gmm_stds), len(self.gmm_weights)))
    if min(self.gmm_stds) <= 0:
      raise ValueError("Mixture standard deviations must be positive (got %s)" % (self.gmm_stds,))

  @property
  def schema(self):
    return FeatureSchema((FeatureSpec('category', 'categorical', len(self.category_pmfs[0])),
        FeatureSpec('value', 'numerical')))

  @property
  def blocks(self):
    """Destination ids of each block"""
    destinations = numpy.arange(self.n_src_nodes, self.n_src_nodes + self.n_dst_nodes)
    return numpy.array_split(destinations, len(self.category_pmfs))


def make_toy(config=None, out_path=None):
  """Samples the toy process and optionally writes it to ``out_path``.

  Returns: the :py:class:`bob.learn.tempgraph.events.EventStream`
  """

  config = config or ToyConfig()
  rng = numpy_generator(config.seed, 'data')
  size = config.n_events
  blocks = config.blocks

  src = rng.integers(config.n_src_nodes, size=size)
  preferred = src % len(blocks)
  hit = rng.random(size) < config.preference
  pick = rng.random(size)
  dst = numpy.empty(size, dtype=numpy.int64)
  group = numpy.empty(size, dtype=numpy.int64)
  for b, members in enumerate(blocks):
    others = numpy.concatenate([m for k, m in enumerate(blocks) if k != b] or [members])
    inside = (preferred == b) & hit
    outside = (preferred == b) & ~hit
    dst[inside] = members[(pick[inside] * len(members)).astype(numpy.int64)]
    dst[outside] = others[(pick[outside] * len(others)).astype(numpy.int64)]
  for b, members in enumerate(blocks):
    group[numpy.isin(dst, members)] = b

  deltas = rng.exponential(1.0 / config.rate, size=size)
  t = reconstruct_timestamps(deltas, 0.0)

  cumulative = numpy.cumsum(numpy.array(config.category_pmfs), axis=1)[:, :-1]
  category = (rng.random(size)[:, None] >= cumulative[group]).sum(axis=1)
  component = rng.choice(len(config.gmm_weights), size=size, p=numpy.array(config.gmm_weights))
  value = rng.normal(numpy.array(config.gmm_means)[component], numpy.array(config.gmm_stds)[component])

  stream = EventStream(src, dst, t, numpy.column_stack([category, value]), config.schema,
      config.n_src_nodes + config.n_dst_nodes, 0.0)
  logger.info("Sampled %d toy interactions over %d nodes", len(stream), stream.num_nodes)
  if out_path is not None:
    write_events(stream, ensure_parent(out_path))
  return stream
