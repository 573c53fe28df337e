#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Generative modelling of continuous-time dynamic graphs: a temporal node
encoder, a probabilistic interaction decoder, training, generation, link
prediction and fidelity evaluation"""

from .events import FeatureSpec, FeatureSchema, Interaction, EventStream, load_events, write_events, \
    chronological_split, inter_event_deltas, reconstruct_timestamps
from .encoder import TemporalEncoder, NodeState, NodeStates, TemporalEmbedding, time_encode, recent_neighbors
from .decoder import InteractionDecoder, InteractionDistribution, CategoricalParams, ExponentialParam, \
    GMMParams, interaction_log_likelihood
from .network import ModelConfig, TemporalGraphModel
from .checkpoint import Checkpoint
from .trainer import TrainConfig, Trainer, train, noise_sigma, sample_candidates, batch_nll
from .generator import GenerationConfig, generate, score_links
from .evaluation import EvaluationConfig, SnapshotStats, Histogram
from .toy import ToyConfig, make_toy
from .query import Database


def get_config():
  """Returns a string containing the configuration information.
  """
  from importlib import metadata
  lines = []
  for package in ('bob.learn.tempgraph', 'numpy', 'scipy', 'pandas', 'torch', 'networkx', 'scikit-learn', 'sqlalchemy'):
    try:
      lines.append('%s: %s' % (package, metadata.version(package)))
    except metadata.PackageNotFoundError:
      lines.append('%s: not installed' % package)
  return '\n'.join(lines)


# gets sphinx autodoc done right - don't remove it
__all__ = [_ for _ in dir() if not _.startswith('_')]
