#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Inference with a trained network: synthesis of new temporal graphs and
link scoring"""

import math
import logging
import dataclasses

import numpy
import torch

from .events import EventStream, reconstruct_timestamps
from .network import model_from_checkpoint
from .errors import DomainError, GenerationError
from .utils import torch_generator

logger = logging.getLogger(__name__)

# re-draws of a destination that equals its source before the pair is dropped
MAX_SELF_LOOP_RETRIES = 10

# consecutive batches without a single kept pair before generation gives up
MAX_EMPTY_BATCHES = 10


@dataclasses.dataclass
class GenerationConfig(object):
  """Parameters of the generation loop.

  Keyword Parameters:

  num_interactions
    Number of interactions to generate

  batch_size
    Interactions sampled per batch before the memories are updated

  node_pool_size
    Number of fresh nodes (defaults to the node count of the training graph)

  seed
    Seed of the ``generate`` random stream
  """

  num_interactions: int = 0
  batch_size: int = 200
  node_pool_size: int = None
  seed: int = 0

  def __post_init__(self):
    if self.num_interactions < 0:
      raise ValueError("num_interactions must be non-negative (got %r)" % self.num_interactions)
    if self.batch_size < 1:
      raise ValueError("batch_size must be positive (got %r)" % self.batch_size)
    if self.node_pool_size is not None and self.node_pool_size < 2:
      raise ValueError("node_pool_size must be at least 2 (got %r)" % self.node_pool_size)


def _destinations(distribution, sources, generator):
  """Draws one destination per source, re-drawing self-loops.

  Returns: the destinations and a mask of the pairs to keep
  """

  destinations = distribution.sample(generator).squeeze(-1)
  keep = torch.ones(len(sources), dtype=torch.bool)
  for i in torch.nonzero(destinations == sources).flatten().tolist():
    row = distribution.probs[i].detach().unsqueeze(0)
    for _ in range(MAX_SELF_LOOP_RETRIES):
      destinations[i] = torch.multinomial(row, 1, generator=generator)[0, 0]
      if destinations[i] != sources[i]:
        break
    else:
      keep[i] = False
      logger.info("Dropped a self-loop on node %d after %d re-draws", int(sources[i]), MAX_SELF_LOOP_RETRIES)
  return destinations, keep


def generate(checkpoint, config):
  """Synthesizes a new temporal graph.

  Generation starts from an empty graph over a pool of fresh nodes. Each batch
  samples its sources from the source distribution over the whole pool, one
  destination per source, and then the inter-event time and features of each
  pair. The sampled times are sorted and accumulated onto the running clock
  before the batch is folded into the memories.

  Keyword Parameters:

  checkpoint
    The trained :py:class:`bob.learn.tempgraph.checkpoint.Checkpoint`

  config
    The :py:class:`GenerationConfig`

  Returns: an :py:class:`bob.learn.tempgraph.events.EventStream` with origin 0
  """

  schema = checkpoint.schema
  pool = config.node_pool_size or checkpoint.num_nodes
  if pool < 2:
    raise ValueError("Generation needs a pool of at least 2 nodes (got %d)" % pool)

  torch.set_num_threads(1)
  model = model_from_checkpoint(checkpoint)
  generator = torch_generator(config.seed, 'generate')
  states = model.fresh_states(pool, 0.0)
  everyone = numpy.arange(pool)

  src, dst, t, features = [], [], [], []
  clock = 0.0
  produced = 0
  empty = 0
  with torch.no_grad():
    while produced < config.num_interactions:
      size = min(config.batch_size, config.num_interactions - produced)
      # neighbours are attended strictly before the query time
      embeddings = model.encoder(states, everyone, math.nextafter(clock, math.inf))
      sources = model.decoder.source_distribution(embeddings).sample(generator, size)
      distribution = model.decoder.destination_distribution(embeddings[sources], embeddings)
      destinations, keep = _destinations(distribution, sources, generator)
      sources = sources[keep]
      destinations = destinations[keep]
      if not len(sources):
        empty += 1
        if empty >= MAX_EMPTY_BATCHES:
          raise GenerationError("Generation stalled: %d consecutive batches held only self-loops" % empty)
        continue
      empty = 0

      h0 = model.decoder.merge(embeddings[sources], embeddings[destinations])
      delta, values, _, _ = model.decoder.time_msg.sample(h0, generator)
      delta = delta.to(torch.float64).numpy()
      order = numpy.argsort(delta, kind='stable')
      times = reconstruct_timestamps(delta[order], clock)

      batch = EventStream(sources.numpy()[order], destinations.numpy()[order], times,
          values.numpy()[order], schema, pool, clock)
      model.encoder.update_memory(states, batch)

      src.append(batch.src)
      dst.append(batch.dst)
      t.append(batch.t)
      features.append(batch.features)
      clock = float(times[-1])
      produced += len(batch)
      logger.info("Generated %d/%d interactions (clock %.3f)", produced, config.num_interactions, clock)

  if not produced:
    return EventStream([], [], [], None, schema, pool, 0.0)
  return EventStream(numpy.concatenate(src), numpy.concatenate(dst), numpy.concatenate(t),
      numpy.concatenate(features), schema, pool, 0.0)


def score_links(checkpoint, states, pairs, model=None):
  """Scores candidate links with the destination module.

  The score of ``(src, dst, t)`` is ``log p(dst | src)`` at time ``t``, the
  destination distribution being normalized over the whole node universe.
  Scores of different sources and times are therefore comparable, which the
  pooled precision and ROC metrics need.

  Keyword Parameters:

  checkpoint
    The trained :py:class:`bob.learn.tempgraph.checkpoint.Checkpoint`

  states
    The :py:class:`bob.learn.tempgraph.encoder.NodeStates` to score against

  pairs
    A sequence of ``(src, dst, t)`` triples

  model
    An already built model of ``checkpoint`` (rebuilt if omitted)

  Returns: a list of reals (log-probabilities), in input order
  """

  model = model or model_from_checkpoint(checkpoint)
  pairs = list(pairs)
  if not pairs:
    return []
  src = numpy.array([p[0] for p in pairs], dtype=numpy.int64)
  dst = numpy.array([p[1] for p in pairs], dtype=numpy.int64)
  t = numpy.array([p[2] for p in pairs], dtype=numpy.float64)
  for name, ids in (('source', src), ('destination', dst)):
    if (ids < 0).any() or (ids >= len(states)).any():
      bad = int(ids[(ids < 0) | (ids >= len(states))][0])
      raise DomainError("Unknown %s node %d (the node universe is [0, %d))" % (name, bad, len(states)))

  scores = numpy.empty(len(pairs), dtype=numpy.float64)
  universe = numpy.arange(len(states))
  with torch.no_grad():
    for at in numpy.unique(t):
      rows = numpy.flatnonzero(t == at)
      embeddings = model.encoder(states, universe, at)
      log_probs = model.decoder.destination_distribution(embeddings[torch.as_tensor(src[rows])], embeddings).log_probs
      picked = log_probs[torch.arange(len(rows)), torch.as_tensor(dst[rows])]
      scores[rows] = picked.double().numpy()
  return scores.tolist()


def replay(model, states, stream, batch_size=200):
  """Folds ``stream`` into ``states`` batch by batch, without scoring"""

  with torch.no_grad():
    for start in range(0, len(stream), batch_size):
      model.encoder.update_memory(states, stream.slice(start, min(start + batch_size, len(stream))))
  return states


def score_stream(checkpoint, states, test, samples, batch_size=200, model=None):
  """Streaming link prediction over a test stream.

  Samples are scored batch by batch following the test stream; after its
  samples are scored, each test batch is folded into the memories.

  Keyword Parameters:

  checkpoint
    The trained :py:class:`bob.learn.tempgraph.checkpoint.Checkpoint`

  states
    Node states holding everything that precedes ``test`` (updated in place)

  test
    The test :py:class:`bob.learn.tempgraph.events.EventStream`

  samples
    Labelled samples, as produced by the negative samplers of
    :py:mod:`bob.learn.tempgraph.evaluation`

  Returns: a tuple ``(labels, scores)`` of numpy arrays, in sample order
  """

  model = model or model_from_checkpoint(checkpoint)
  samples = list(samples)
  scores = numpy.zeros(len(samples), dtype=numpy.float64)
  labels = numpy.array([s.label for s in samples], dtype=numpy.int64)
  batch_of = numpy.array([s.position // batch_size for s in samples], dtype=numpy.int64)

  for number, start in enumerate(range(0, len(test), batch_size)):
    members = numpy.flatnonzero(batch_of == number)
    if len(members):
      scores[members] = score_links(checkpoint, states, [samples[i].pair for i in members], model)
    replay(model, states, test.slice(start, min(start + batch_size, len(test))), batch_size)

  return labels, scores
