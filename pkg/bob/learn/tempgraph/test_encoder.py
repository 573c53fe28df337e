#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Tests for node memory and temporal embeddings"""

import math

import numpy
import torch
import pytest

from .encoder import TemporalEncoder, TimeEncoder, TimeEncoderParams, NodeStates, \
    time_encode, recent_neighbors, encode_features
from .events import EventStream
from .errors import DomainError, TemporalConsistencyError
from .test_utils import tiny_schema, tiny_stream


def _encoder(**kwargs):
  torch.manual_seed(0)
  return TemporalEncoder(tiny_schema(), d_mem=8, d_emb=8, d_time=4, k_nbr=3, num_heads=2, **kwargs)


def _batch(src, dst, t, categories=None, values=None, num_nodes=5):
  size = len(t)
  categories = categories if categories is not None else [0] * size
  values = values if values is not None else [0.0] * size
  return EventStream(src, dst, t, numpy.column_stack([categories, values]), tiny_schema(), num_nodes, 0.0)


def test_time_encoding():

  params = TimeEncoderParams(torch.tensor([1.0, 0.5]), torch.tensor([0.0, 0.0]))
  assert torch.allclose(time_encode(0.0, params), torch.tensor([1.0, 1.0]))
  assert torch.allclose(time_encode(math.pi, params), torch.tensor([-1.0, 0.0]), atol=1e-6)
  assert time_encode(torch.zeros(3, 2), params).shape == (3, 2, 2)

  encoder = TimeEncoder(10)
  assert encoder.omega[0].item() == 1.0
  assert abs(encoder.omega[-1].item() - 1e-9) < 1e-15
  assert encoder(torch.tensor([0.0])).shape == (1, 10)


def test_recent_neighbors():

  entries = [(1, 1.0, ()), (2, 2.0, ()), (3, 3.0, ())]
  assert recent_neighbors(entries, 3.0, 2) == [(2, 2.0, ()), (1, 1.0, ())]
  assert recent_neighbors(entries, 10.0, 5) == list(reversed(entries))
  assert recent_neighbors(entries, 1.0, 5) == []
  with pytest.raises(ValueError):
    recent_neighbors(entries, 1.0, 0)


def test_encode_features():

  encoded = encode_features(tiny_schema(), [[2, 0.5], [0, -1.0]])
  assert torch.equal(encoded, torch.tensor([[0.0, 0.0, 1.0, 0.5], [1.0, 0.0, 0.0, -1.0]]))
  assert encode_features(tiny_schema(), numpy.zeros((2, 3, 2))).shape == (2, 3, 4)


def test_update_touches_only_batch_nodes():

  encoder = _encoder()
  states = encoder.fresh_states(5)
  before = states.clone()

  with torch.no_grad():
    encoder.update_memory(states, _batch([0, 2], [1, 1], [1.0, 2.0], [1, 2], [0.5, -0.5]))

  for node in (3, 4):
    assert torch.equal(states.memory[node], before.memory[node])
    assert states.last_update[node].item() == 0.0
    assert len(states.neighbors[node]) == 0
  for node in (0, 1, 2):
    assert not torch.equal(states.memory[node], before.memory[node])

  assert states.last_update[0].item() == 1.0
  assert states.last_update[1].item() == 2.0
  assert states.last_update[2].item() == 2.0
  assert list(states.neighbors[1]) == [(0, 1.0, (1.0, 0.5)), (2, 2.0, (2.0, -0.5))]
  assert states[0].neighbors == [(1, 1.0, (1.0, 0.5))]


def test_neighbor_capacity():

  encoder = _encoder()
  states = encoder.fresh_states(5)
  with torch.no_grad():
    encoder.update_memory(states, _batch([0, 0, 0, 0, 0], [1, 2, 3, 4, 1], [1.0, 2.0, 3.0, 4.0, 5.0]))
  assert len(states.neighbors[0]) == 3
  assert [p for p, _, _ in states.neighbors[0]] == [3, 4, 1]


def test_update_errors():

  encoder = _encoder()
  states = encoder.fresh_states(5)
  with torch.no_grad():
    encoder.update_memory(states, _batch([0], [1], [3.0]))

    # older than the last update of node 0
    with pytest.raises(TemporalConsistencyError):
      encoder.update_memory(states, _batch([0], [2], [2.0]))

    with pytest.raises(DomainError):
      encoder.update_memory(states, _batch([0], [7], [4.0], num_nodes=8))

  # empty batches are a no-op
  digest = states.digest()
  encoder.update_memory(states, [])
  assert states.digest() == digest


def test_embedding_shape_and_order():

  encoder = _encoder()
  states = encoder.fresh_states(5)
  with torch.no_grad():
    encoder.update_memory(states, _batch([0, 2, 3], [1, 1, 0], [1.0, 2.0, 3.0]))
    digest = states.digest()
    forward = encoder(states, [0, 1, 4], 5.0)
    backward = encoder(states, [4, 1, 0], 5.0)

  assert forward.shape == (3, 8)
  assert torch.allclose(forward, backward.flip(0), atol=1e-6)
  # embedding reads the states without changing them
  assert states.digest() == digest

  embeddings = encoder.embed(states, [0, 1], 5.0)
  assert [e.node for e in embeddings] == [0, 1]
  assert embeddings[0].at_time == 5.0
  assert embeddings[0].vector.shape == (8,)

  with pytest.raises(DomainError):
    encoder(states, [5], 5.0)


def test_embedding_ignores_future_neighbors():

  encoder = _encoder()
  empty = encoder.fresh_states(3)
  states = encoder.fresh_states(3)
  states.neighbors[0].append((1, 5.0, (1.0, 0.25)))

  with torch.no_grad():
    alone = encoder(empty, [0], 5.0)
    at_interaction = encoder(states, [0], 5.0)
    later = encoder(states, [0], 6.0)

  assert torch.allclose(alone, at_interaction)
  assert not torch.allclose(alone, later)


def test_memory_only_embeddings():

  encoder = _encoder(disable_attention=True)
  empty = encoder.fresh_states(3)
  states = encoder.fresh_states(3)
  states.neighbors[0].append((1, 1.0, (1.0, 0.25)))
  with torch.no_grad():
    assert torch.equal(encoder(empty, [0], 5.0), encoder(states, [0], 5.0))


def test_states_copy():

  encoder = _encoder()
  states = encoder.fresh_states(7)
  with torch.no_grad():
    encoder.update_memory(states, tiny_stream())

  copy = NodeStates.from_state_dict(states.state_dict())
  assert copy.digest() == states.digest()

  clone = states.clone()
  with torch.no_grad():
    encoder.update_memory(clone, _batch([0], [1], [20.0], num_nodes=7))
  assert clone.digest() != states.digest()
  assert copy.digest() == states.digest()


def test_time_encoding_cases():

  zeros = TimeEncoderParams(torch.zeros(3), torch.zeros(3))
  assert torch.equal(time_encode(12.5, zeros), torch.ones(3))

  phases = TimeEncoderParams(torch.tensor([1.0, 2.0]), torch.tensor([0.3, -1.2]))
  assert torch.allclose(time_encode(0.0, phases), torch.cos(phases.phi))

  half_turn = TimeEncoderParams(torch.tensor([math.pi], dtype=torch.float64), torch.zeros(1, dtype=torch.float64))
  assert abs(time_encode(1.0, half_turn).item() + 1.0) < 1e-12


def test_recent_neighbors_cases():

  entries = [(k, float(k), ()) for k in (1, 2, 3, 4, 5)]
  assert [t for _, t, _ in recent_neighbors(entries, 10.0, 3)] == [5.0, 4.0, 3.0]
  assert [t for _, t, _ in recent_neighbors(entries[:3], 2.0, 3)] == [1.0]
  assert recent_neighbors([], 10.0, 3) == []


def test_latest_message_wins():

  encoder = _encoder()
  both = encoder.fresh_states(6)
  last = encoder.fresh_states(6)
  with torch.no_grad():
    encoder.update_memory(both, _batch([5, 5], [1, 2], [1.0, 2.0], num_nodes=6))
    encoder.update_memory(last, _batch([5], [2], [2.0], num_nodes=6))

  assert torch.allclose(both.memory[5], last.memory[5], atol=1e-6)
  assert both.last_update[5].item() == 2.0


def test_source_and_destination_memories_differ():

  encoder = _encoder()
  states = encoder.fresh_states(4)
  with torch.no_grad():
    encoder.update_memory(states, _batch([0], [1], [1.0], num_nodes=4))

  # same old memory, peer memory, elapsed time and features: only the role differs
  assert not torch.allclose(states.memory[0], states.memory[1])
  assert states.last_update[0].item() == states.last_update[1].item() == 1.0


def test_embedding_is_repeatable():

  encoder = _encoder()
  states = encoder.fresh_states(7)
  with torch.no_grad():
    encoder.update_memory(states, tiny_stream())
    first = encoder(states, [0, 3, 6], 10.0)
    second = encoder(states, [0, 3, 6], 10.0)
  assert torch.equal(first, second)
