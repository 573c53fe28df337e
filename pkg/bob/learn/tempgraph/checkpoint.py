#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Versioned binary container for trained (or partially trained) models.

Layout of a checkpoint file::

  bytes 0-3    magic ``DGG1``
  bytes 4-7    format version, little-endian uint32
  bytes 8-15   payload length in bytes, little-endian uint64
  bytes 16-    payload, a :py:func:`torch.save` archive of a plain dictionary
"""

import io
import struct
import logging
import dataclasses

import torch

from .events import FeatureSchema
from .encoder import NodeStates
from .network import ModelConfig
from .errors import CheckpointError
from .utils import ensure_parent

logger = logging.getLogger(__name__)

MAGIC = b'DGG1'
FORMAT_VERSION = 1
_HEADER = struct.Struct('<4sIQ')


@dataclasses.dataclass
class Checkpoint(object):
  """Everything needed to resume training or to run inference.

  ``train_config`` is the dictionary form of the training configuration;
  ``pending`` are the bounds of the last scored batch not yet folded into
  ``node_states``; ``epoch_total`` and ``epoch_count`` accumulate the loss of
  the current (unfinished) epoch.
  """

  schema: FeatureSchema
  model_config: ModelConfig
  model_state: dict
  num_nodes: int
  origin_time: float = 0.0
  train_config: dict = dataclasses.field(default_factory=dict)
  node_states: NodeStates = None
  optimizer_state: dict = None
  rng_state: torch.Tensor = None
  step: int = 0
  epoch: int = 0
  batch: int = 0
  pending: tuple = None
  history: list = dataclasses.field(default_factory=list)
  epoch_total: float = 0.0
  epoch_count: int = 0
  version: int = FORMAT_VERSION

  def to_dict(self):
    return {
        'schema': self.schema.to_dict(),
        'model_config': self.model_config.to_dict(),
        'model_state': dict(self.model_state),
        'num_nodes': int(self.num_nodes),
        'origin_time': float(self.origin_time),
        'train_config': dict(self.train_config),
        'node_states': self.node_states.state_dict() if self.node_states is not None else None,
        'optimizer_state': self.optimizer_state,
        'rng_state': self.rng_state,
        'step': int(self.step),
        'epoch': int(self.epoch),
        'batch': int(self.batch),
        'pending': list(self.pending) if self.pending is not None else None,
        'history': [float(k) for k in self.history],
        'epoch_total': float(self.epoch_total),
        'epoch_count': int(self.epoch_count),
    }

  @classmethod
  def from_dict(cls, data, version=FORMAT_VERSION):
    try:
      return cls(
          schema=FeatureSchema.from_dict(data['schema']),
          model_config=ModelConfig.from_dict(data['model_config']),
          model_state=data['model_state'],
          num_nodes=data['num_nodes'],
          origin_time=data['origin_time'],
          train_config=data['train_config'],
          node_states=NodeStates.from_state_dict(data['node_states']) if data['node_states'] is not None else None,
          optimizer_state=data['optimizer_state'],
          rng_state=data['rng_state'],
          step=data['step'],
          epoch=data['epoch'],
          batch=data['batch'],
          pending=tuple(data['pending']) if data['pending'] is not None else None,
          history=list(data['history']),
          epoch_total=data['epoch_total'],
          epoch_count=data['epoch_count'],
          version=version,
      )
    except (KeyError, TypeError) as e:
      raise CheckpointError("Checkpoint payload is incomplete: %s" % e)


def dumps(checkpoint):
  """Serializes a checkpoint to bytes"""

  buffer = io.BytesIO()
  torch.save(checkpoint.to_dict(), buffer)
  payload = buffer.getvalue()
  return _HEADER.pack(MAGIC, FORMAT_VERSION, len(payload)) + payload


def loads(data):
  """Deserializes bytes produced by :py:func:`dumps`"""

  if len(data) < _HEADER.size:
    raise CheckpointError("Checkpoint is truncated (%d bytes)" % len(data))
  magic, version, length = _HEADER.unpack_from(data)
  if magic != MAGIC:
    raise CheckpointError("Not a checkpoint (magic %r, expected %r)" % (magic, MAGIC))
  if version != FORMAT_VERSION:
    raise CheckpointError("Unsupported checkpoint version %d (this release reads version %d)" % (version, FORMAT_VERSION))
  payload = data[_HEADER.size:]
  if len(payload) != length:
    raise CheckpointError("Checkpoint payload has %d bytes, the header announces %d" % (len(payload), length))
  try:
    content = torch.load(io.BytesIO(payload), weights_only=True)
  except Exception as e:
    raise CheckpointError("Cannot decode checkpoint payload: %s" % e)
  return Checkpoint.from_dict(content, version)


def save(checkpoint, path):
  """Writes a checkpoint to ``path``"""

  ensure_parent(path)
  with open(path, 'wb') as f:
    f.write(dumps(checkpoint))
  logger.info("Saved checkpoint (epoch %d, step %d) to '%s'", checkpoint.epoch, checkpoint.step, path)


def load(path):
  """Reads a checkpoint written by :py:func:`save`"""

  with open(path, 'rb') as f:
    return loads(f.read())
