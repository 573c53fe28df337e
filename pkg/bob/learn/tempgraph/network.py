#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""The complete generative network: temporal encoder plus interaction decoder"""

import logging
import dataclasses

import torch

from .encoder import TemporalEncoder
from .decoder import InteractionDecoder
from .utils import derive_seed

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class ModelConfig(object):
  """Architecture hyper-parameters"""

  d_mem: int = 100
  d_emb: int = 100
  d_time: int = 8
  k_nbr: int = 10
  num_heads: int = 2
  gmm_components: int = 3
  d_h0: int = 100
  disable_attention: bool = False

  def __post_init__(self):
    for name in ('d_mem', 'd_emb', 'd_time', 'k_nbr', 'num_heads', 'gmm_components', 'd_h0'):
      value = getattr(self, name)
      if int(value) != value or value < 1:
        raise ValueError("Model parameter '%s' must be a positive integer (got %r)" % (name, value))
    if self.d_emb % self.num_heads:
      raise ValueError("d_emb (%d) must be divisible by num_heads (%d)" % (self.d_emb, self.num_heads))

  def to_dict(self):
    return dataclasses.asdict(self)

  @classmethod
  def from_dict(cls, data):
    return cls(**data)


class TemporalGraphModel(torch.nn.Module):
  """Joins the :py:class:`TemporalEncoder` and the :py:class:`InteractionDecoder`
  of an edge feature schema"""

  def __init__(self, schema, config=None):
    super(TemporalGraphModel, self).__init__()
    config = config or ModelConfig()
    self.schema = schema
    self.config = config
    self.encoder = TemporalEncoder(schema, d_mem=config.d_mem, d_emb=config.d_emb,
        d_time=config.d_time, k_nbr=config.k_nbr, num_heads=config.num_heads,
        disable_attention=config.disable_attention)
    self.decoder = InteractionDecoder(schema, config.d_emb, d_h0=config.d_h0,
        gmm_components=config.gmm_components)

  def fresh_states(self, num_nodes, origin_time=0.0):
    return self.encoder.fresh_states(num_nodes, origin_time)

  def weights(self):
    """A detached copy of the state dictionary"""
    return dict((k, v.detach().clone()) for k, v in self.state_dict().items())


def build_model(schema, config=None, seed=0):
  """Instantiates a model whose initial weights depend only on ``seed``"""

  with torch.random.fork_rng(devices=[]):
    torch.manual_seed(derive_seed(seed, 'init'))
    model = TemporalGraphModel(schema, config)
  logger.debug("Built a model with %d parameters", sum(p.numel() for p in model.parameters()))
  return model


def model_from_checkpoint(checkpoint):
  """Rebuilds the trained network stored in a checkpoint"""

  model = build_model(checkpoint.schema, checkpoint.model_config)
  model.load_state_dict(checkpoint.model_state)
  model.eval()
  return model
