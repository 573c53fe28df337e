#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Tests for checkpoint files"""

import torch
import pytest

from . import checkpoint as checkpoint_io
from .errors import CheckpointError
from .network import model_from_checkpoint
from .trainer import train
from .test_utils import tiny_stream, small_config


def _trained():
  return train(tiny_stream(), small_config(epochs=1))


def test_save_and_load(tmp_path):

  checkpoint = _trained()
  path = str(tmp_path / 'nested' / 'model.dgg')
  checkpoint_io.save(checkpoint, path)

  with open(path, 'rb') as f:
    assert f.read(4) == checkpoint_io.MAGIC

  loaded = checkpoint_io.load(path)
  assert loaded.schema == checkpoint.schema
  assert loaded.model_config == checkpoint.model_config
  assert loaded.num_nodes == 7
  assert loaded.step == checkpoint.step == 3
  assert loaded.history == checkpoint.history
  assert loaded.train_config == checkpoint.train_config
  assert loaded.node_states.digest() == checkpoint.node_states.digest()
  assert all(torch.equal(loaded.model_state[k], v) for k, v in checkpoint.model_state.items())
  assert torch.equal(loaded.rng_state, checkpoint.rng_state)

  model = model_from_checkpoint(loaded)
  assert not model.training
  assert all(torch.equal(model.state_dict()[k], v) for k, v in checkpoint.model_state.items())


def test_corrupt_files():

  data = checkpoint_io.dumps(_trained())

  with pytest.raises(CheckpointError):
    checkpoint_io.loads(b'XXXX' + data[4:])

  # version 2 in the header
  with pytest.raises(CheckpointError):
    checkpoint_io.loads(data[:4] + (2).to_bytes(4, 'little') + data[8:])

  with pytest.raises(CheckpointError):
    checkpoint_io.loads(data[:-10])

  with pytest.raises(CheckpointError):
    checkpoint_io.loads(data[:10])

  header = checkpoint_io._HEADER.pack(checkpoint_io.MAGIC, checkpoint_io.FORMAT_VERSION, 5)
  with pytest.raises(CheckpointError):
    checkpoint_io.loads(header + b'12345')
