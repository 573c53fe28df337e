#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Node memory and temporal embeddings.

Each node owns a memory vector, the time of its last update and a bounded
list of its most recent interactions. Memories are refreshed by a gated
recurrent cell from messages built out of a batch of interactions; temporal
embeddings attend over the memories of a node's recent neighbours.
"""

import hashlib
import logging
import collections
import dataclasses

import numpy
import torch
import torch.nn.functional as F

from .events import EventStream
from .errors import DomainError, ShapeError, TemporalConsistencyError

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class TimeEncoderParams(object):
  """Frequencies and phases of the functional time encoding"""

  omega: torch.Tensor
  phi: torch.Tensor


def time_encode(delta, params):
  """Encodes time differences as ``cos(omega * delta + phi)``.

  Keyword Parameters:

  delta
    A real or a tensor of reals, of any shape

  params
    The :py:class:`TimeEncoderParams` to use

  Returns: a tensor of shape ``delta.shape + (d_time,)``
  """

  delta = torch.as_tensor(delta, dtype=params.omega.dtype)
  return torch.cos(delta.unsqueeze(-1) * params.omega + params.phi)


class TimeEncoder(torch.nn.Module):
  """Learnable time encoding, ``cos(omega * delta + phi)``"""

  def __init__(self, d_time):
    super(TimeEncoder, self).__init__()
    self.omega = torch.nn.Parameter(torch.from_numpy(1. / 10 ** numpy.linspace(0, 9, d_time)).float())
    self.phi = torch.nn.Parameter(torch.zeros(d_time))

  @property
  def params(self):
    return TimeEncoderParams(self.omega, self.phi)

  def forward(self, delta):
    return time_encode(delta, self.params)


@dataclasses.dataclass
class NodeState(object):
  """A copy of one node's encoder state"""

  memory: torch.Tensor
  last_update: float
  neighbors: list


@dataclasses.dataclass
class TemporalEmbedding(object):
  """The representation of a node at a point in time"""

  vector: torch.Tensor
  node: int
  at_time: float


def recent_neighbors(state, at_time, k):
  """Returns up to ``k`` neighbours that interacted strictly before
  ``at_time``, most recent first.

  Keyword Parameters:

  state
    A :py:class:`NodeState` or a neighbour sequence ordered oldest first

  at_time
    The query time

  k
    Maximum number of neighbours (positive)

  Returns: a list of ``(peer, time, features)`` tuples
  """

  if k < 1:
    raise ValueError("The number of neighbours must be positive (got %d)" % k)
  neighbors = state.neighbors if isinstance(state, NodeState) else state
  retval = []
  for entry in reversed(neighbors):
    if entry[1] < at_time:
      retval.append(entry)
      if len(retval) == k: break
  return retval


class NodeStates(object):
  """Encoder state of a whole node universe.

  ``memory`` is a ``(num_nodes, d_mem)`` tensor, ``last_update`` a float64
  tensor of update times and ``neighbors`` one bounded deque per node with
  ``(peer, time, features)`` entries, oldest first. A single actor mutates a
  given instance.
  """

  def __init__(self, memory, last_update, neighbors, k_nbr):
    self.memory = memory
    self.last_update = last_update
    self.neighbors = neighbors
    self.k_nbr = k_nbr

  @classmethod
  def fresh(cls, num_nodes, d_mem, k_nbr, origin_time=0.0, dtype=torch.float32):
    return cls(torch.zeros(num_nodes, d_mem, dtype=dtype),
        torch.full((num_nodes,), float(origin_time), dtype=torch.float64),
        [collections.deque(maxlen=k_nbr) for _ in range(num_nodes)], k_nbr)

  def __len__(self):
    return self.memory.shape[0]

  def __getitem__(self, node):
    return NodeState(self.memory[node].detach().clone(), float(self.last_update[node]), list(self.neighbors[node]))

  def clone(self):
    return NodeStates(self.memory.detach().clone(), self.last_update.clone(),
        [collections.deque(d, maxlen=self.k_nbr) for d in self.neighbors], self.k_nbr)

  def detach_(self):
    """Cuts the autograd history of the memory (batch boundary)"""
    self.memory = self.memory.detach()
    return self

  def digest(self):
    """SHA-256 over memory, update times and neighbour lists"""
    h = hashlib.sha256()
    h.update(self.memory.detach().contiguous().numpy().tobytes())
    h.update(self.last_update.numpy().tobytes())
    for entries in self.neighbors:
      h.update(repr(list(entries)).encode('utf-8'))
      h.update(b'|')
    return h.hexdigest()

  def state_dict(self):
    return {
        'memory': self.memory.detach().clone(),
        'last_update': self.last_update.clone(),
        'neighbors': [[(int(p), float(t), tuple(float(v) for v in f)) for p, t, f in d] for d in self.neighbors],
        'k_nbr': self.k_nbr,
    }

  @classmethod
  def from_state_dict(cls, data):
    k_nbr = int(data['k_nbr'])
    neighbors = [collections.deque(((int(p), float(t), tuple(f)) for p, t, f in entries), maxlen=k_nbr)
        for entries in data['neighbors']]
    return cls(data['memory'].clone(), data['last_update'].clone(), neighbors, k_nbr)


def encode_features(schema, values, dtype=torch.float32):
  """Concatenates one-hot codes of categorical and raw numerical features.

  Returns: a tensor of shape ``values.shape[:-1] + (schema.encoded_dim,)``
  """

  values = torch.as_tensor(values, dtype=torch.float64)
  parts = []
  for k, spec in enumerate(schema):
    column = values[..., k]
    if spec.is_categorical:
      parts.append(F.one_hot(column.long(), spec.cardinality).to(dtype))
    else:
      parts.append(column.to(dtype).unsqueeze(-1))
  if not parts:
    return torch.zeros(values.shape[:-1] + (0,), dtype=dtype)
  return torch.cat(parts, dim=-1)


def _batch_arrays(batch):
  """Column arrays of a batch given as a stream or a sequence of interactions"""

  if isinstance(batch, EventStream):
    return batch.src, batch.dst, batch.t, batch.features
  batch = list(batch)
  if not batch:
    empty = numpy.zeros((0,), dtype=numpy.int64)
    return empty, empty, numpy.zeros((0,), dtype=numpy.float64), numpy.zeros((0, 0), dtype=numpy.float64)
  return (numpy.array([i.src for i in batch], dtype=numpy.int64),
      numpy.array([i.dst for i in batch], dtype=numpy.int64),
      numpy.array([i.t for i in batch], dtype=numpy.float64),
      numpy.array([tuple(i.features) for i in batch], dtype=numpy.float64))


class TemporalEncoder(torch.nn.Module):
  """Memory module plus attention-based embedding module.

  Keyword Parameters:

  schema
    The :py:class:`bob.learn.tempgraph.events.FeatureSchema` of the edges

  d_mem, d_emb, d_time
    Memory, embedding and time-encoding dimensions

  k_nbr
    Capacity of the neighbour lists (and number of attended neighbours)

  num_heads
    Attention heads; must divide ``d_emb``

  disable_attention
    If set, embeddings are a projection of the node memory alone
  """

  def __init__(self, schema, d_mem=100, d_emb=100, d_time=8, k_nbr=10, num_heads=2, disable_attention=False):
    super(TemporalEncoder, self).__init__()
    if d_emb % num_heads:
      raise ValueError("The embedding dimension (%d) must be divisible by the number of heads (%d)" % (d_emb, num_heads))
    self.schema = schema
    self.d_mem = d_mem
    self.d_emb = d_emb
    self.d_time = d_time
    self.k_nbr = k_nbr
    self.disable_attention = disable_attention

    d_feat = schema.encoded_dim
    # own memory, peer memory, source flag, time encoding, features
    message_dim = 2 * d_mem + 1 + d_time + d_feat
    neighbor_dim = d_mem + d_time + d_feat

    self.time_encoder = TimeEncoder(d_time)
    self.memory_cell = torch.nn.GRUCell(message_dim, d_mem)
    self.query = torch.nn.Linear(d_mem + d_time, d_emb)
    self.attention = torch.nn.MultiheadAttention(d_emb, num_heads, kdim=neighbor_dim, vdim=neighbor_dim, batch_first=True)
    self.output = torch.nn.Sequential(
        torch.nn.Linear(d_emb + d_mem, d_emb),
        torch.nn.ReLU(),
        torch.nn.Linear(d_emb, d_emb),
    )

  @property
  def dtype(self):
    return self.query.weight.dtype

  def fresh_states(self, num_nodes, origin_time=0.0):
    """Zero memories, no neighbours, last update at ``origin_time``"""
    return NodeStates.fresh(num_nodes, self.d_mem, self.k_nbr, origin_time, self.dtype)

  def update_memory(self, states, batch):
    """Folds a chronologically ordered batch into the node states.

    Every node touched by the batch receives the message of its most recent
    interaction: its own memory, the peer's memory, a flag set when the node
    was the source, the encoding of the time since its last update and the
    edge features. The recurrent cell combines it with the old memory.
    Untouched nodes keep their state bit for bit.
    The states are updated in place (memory out of place, so autograd sees the
    update) and returned.
    """

    src, dst, t, features = _batch_arrays(batch)
    if not len(t):
      return states
    if (numpy.diff(t) < 0).any():
      raise TemporalConsistencyError("Batch interactions are not chronologically ordered")
    for name, ids in (('source', src), ('destination', dst)):
      if (ids < 0).any() or (ids >= len(states)).any():
        raise DomainError("A %s node id of the batch is outside [0, %d)" % (name, len(states)))

    last_update = states.last_update.numpy()
    stale = numpy.flatnonzero((t < last_update[src]) | (t < last_update[dst]))
    if len(stale):
      i = int(stale[0])
      raise TemporalConsistencyError("Interaction %d (t=%r) is older than the last update of node %d or %d" % (i, t[i], src[i], dst[i]))

    # most recent message per node; a later event overrides an earlier one
    latest = collections.OrderedDict()
    for i in range(len(t)):
      latest[int(src[i])] = (i, int(dst[i]), 1.0)
      latest[int(dst[i])] = (i, int(src[i]), 0.0)

    nodes = torch.tensor(list(latest.keys()), dtype=torch.long)
    events = numpy.array([e for e, _, _ in latest.values()], dtype=numpy.int64)
    peers = torch.tensor([p for _, p, _ in latest.values()], dtype=torch.long)
    role = torch.tensor([[r] for _, _, r in latest.values()], dtype=self.dtype)

    memory = states.memory
    elapsed = torch.from_numpy(t[events] - last_update[nodes.numpy()])
    message = torch.cat([
        memory[nodes],
        memory[peers],
        role,
        self.time_encoder(elapsed),
        encode_features(self.schema, features[events], self.dtype),
    ], dim=1)
    updated = self.memory_cell(message, memory[nodes])
    states.memory = memory.index_copy(0, nodes, updated)
    states.last_update[nodes] = torch.from_numpy(t[events])

    for i in range(len(t)):
      entry_features = tuple(float(v) for v in features[i])
      states.neighbors[int(src[i])].append((int(dst[i]), float(t[i]), entry_features))
      if dst[i] != src[i]:
        states.neighbors[int(dst[i])].append((int(src[i]), float(t[i]), entry_features))

    return states

  def _neighborhood(self, states, nodes, at_time):
    """Padded neighbour tables of shape ``(len(nodes), k_nbr)``"""

    k = self.k_nbr
    size = len(nodes)
    peers = numpy.zeros((size, k), dtype=numpy.int64)
    times = numpy.zeros((size, k), dtype=numpy.float64)
    values = numpy.zeros((size, k, self.schema.n), dtype=numpy.float64)
    valid = numpy.zeros((size, k), dtype=bool)
    for row, (node, when) in enumerate(zip(nodes, at_time)):
      for j, (peer, time, entry) in enumerate(recent_neighbors(states.neighbors[node], when, k)):
        peers[row, j] = peer
        times[row, j] = time
        values[row, j] = entry
        valid[row, j] = True
    return peers, times, values, valid

  def forward(self, states, nodes, at_time):
    """Embeds ``nodes`` at ``at_time`` (one time, or one per node).

    Returns: a ``(len(nodes), d_emb)`` tensor, rows in input order
    """

    nodes = numpy.array(nodes, dtype=numpy.int64).reshape(-1)
    if (nodes < 0).any() or (nodes >= len(states)).any():
      raise DomainError("Node ids must lie in [0, %d)" % len(states))
    at_time = numpy.broadcast_to(numpy.asarray(at_time, dtype=numpy.float64), nodes.shape)

    index = torch.from_numpy(nodes)
    memory = states.memory[index]
    query = self.query(torch.cat([memory, self.time_encoder(torch.zeros(len(nodes), dtype=torch.float64))], dim=1))

    attended = torch.zeros_like(query)
    if not self.disable_attention and len(nodes):
      peers, times, values, valid = self._neighborhood(states, nodes, at_time)
      has_neighbors = valid.any(axis=1)
      if has_neighbors.any():
        keys = torch.cat([
            states.memory[torch.from_numpy(peers)],
            self.time_encoder(torch.from_numpy(at_time[:, None] - times)),
            encode_features(self.schema, values, self.dtype),
        ], dim=2)
        padding = ~valid
        # nodes without neighbours attend a dummy slot; their output is masked
        padding[~has_neighbors, 0] = False
        out, _ = self.attention(query.unsqueeze(1), keys, keys, key_padding_mask=torch.from_numpy(padding), need_weights=False)
        mask = torch.from_numpy(has_neighbors).to(query.dtype).unsqueeze(1)
        attended = out.squeeze(1) * mask

    return self.output(torch.cat([attended, memory], dim=1))

  def embed(self, states, nodes, at_time):
    """Like :py:meth:`forward`, returning :py:class:`TemporalEmbedding` objects"""

    nodes = [int(n) for n in nodes]
    times = numpy.broadcast_to(numpy.asarray(at_time, dtype=numpy.float64), (len(nodes),))
    vectors = self.forward(states, nodes, times)
    if vectors.shape[-1] != self.d_emb:
      raise ShapeError("Embedding width %d differs from d_emb=%d" % (vectors.shape[-1], self.d_emb))
    return [TemporalEmbedding(v, n, float(w)) for v, n, w in zip(vectors, nodes, times)]
