#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Maximum-likelihood training of the generative network.

Each epoch walks the training stream chronologically, batch by batch. The
loss of a batch is the negative log-likelihood of its interactions, with the
source and destination categoricals normalized over a random candidate set
that always holds the batch's true nodes. Node memories are reset at every
epoch start and detached at batch boundaries: batch ``b`` is folded into the
memory (with gradient) right before batch ``b + 1`` is scored.
"""

import copy
import math
import time
import logging
import dataclasses

import numpy
import torch

from . import checkpoint as checkpoint_io
from .decoder import interaction_log_likelihood
from .events import inter_event_deltas
from .network import ModelConfig, build_model
from .errors import DomainError, TrainingError
from .utils import torch_generator, ensure_parent

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class TrainConfig(object):
  """Training hyper-parameters, including the architecture of the network.

  Keyword Parameters:

  batch_size
    Interactions per optimizer step

  epochs
    Passes over the training stream (0 yields an untrained checkpoint)

  learning_rate
    Adam step size

  warmup_epochs
    The step size ramps up quadratically from nearly zero to
    ``learning_rate`` over this many epochs (0 disables the ramp)

  candidate_multiplier
    The candidate set holds about ``candidate_multiplier * batch_size`` nodes

  noise_sigma_start, noise_sigma_end
    End points of the geometric annealing of the stabilization noise

  seed
    Seed of the ``init`` (weights) and ``train`` (candidates, noise) streams

  disable_attention, disable_noise
    Ablation switches
  """

  batch_size: int = 200
  epochs: int = 50
  learning_rate: float = 5e-4
  warmup_epochs: float = 5.0
  candidate_multiplier: float = 2.0
  noise_sigma_start: float = 0.1
  noise_sigma_end: float = 0.001
  seed: int = 0
  disable_attention: bool = False
  disable_noise: bool = False
  d_mem: int = 100
  d_emb: int = 100
  d_time: int = 8
  k_nbr: int = 10
  num_heads: int = 2
  gmm_components: int = 3
  d_h0: int = 100

  def __post_init__(self):
    if self.batch_size < 1:
      raise ValueError("batch_size must be positive (got %r)" % self.batch_size)
    if self.epochs < 0:
      raise ValueError("epochs must be non-negative (got %r)" % self.epochs)
    if not self.learning_rate > 0:
      raise ValueError("learning_rate must be positive (got %r)" % self.learning_rate)
    if not self.warmup_epochs >= 0:
      raise ValueError("warmup_epochs must be non-negative (got %r)" % self.warmup_epochs)
    if self.candidate_multiplier < 1:
      raise ValueError("candidate_multiplier must be at least 1 (got %r)" % self.candidate_multiplier)
    if not (self.noise_sigma_start >= self.noise_sigma_end >= 0):
      raise ValueError("Noise levels must satisfy noise_sigma_start >= noise_sigma_end >= 0 (got %r, %r)" % (self.noise_sigma_start, self.noise_sigma_end))
    self.model_config()

  def model_config(self):
    return ModelConfig(d_mem=self.d_mem, d_emb=self.d_emb, d_time=self.d_time, k_nbr=self.k_nbr,
        num_heads=self.num_heads, gmm_components=self.gmm_components, d_h0=self.d_h0,
        disable_attention=self.disable_attention)

  def to_dict(self):
    return dataclasses.asdict(self)

  @classmethod
  def from_dict(cls, data):
    return cls(**data)


def learning_rate_at(step, steps_per_epoch, config):
  """Adam step size at optimizer step ``step`` (0-based)

  The rate grows as the square of the warmup progress and stays at
  ``learning_rate`` once ``warmup_epochs * steps_per_epoch`` steps are done.
  Depends on the step count only, so resumed runs see the same schedule.
  """

  if step < 0 or steps_per_epoch < 1:
    raise ValueError("Expected step >= 0 and steps_per_epoch >= 1 (got %r, %r)" % (step, steps_per_epoch))
  warmup_steps = config.warmup_epochs * steps_per_epoch
  if warmup_steps <= 0:
    return float(config.learning_rate)
  return float(config.learning_rate) * min(1.0, ((step + 1) / warmup_steps) ** 2)


def noise_sigma(step, total_steps, config):
  """Standard deviation of the noise at optimizer step ``step``.

  Interpolates geometrically from ``noise_sigma_start`` (step 0) to
  ``noise_sigma_end`` (step ``total_steps``).
  """

  if config.disable_noise:
    return 0.0
  if total_steps < 1 or not (0 <= step <= total_steps):
    raise ValueError("Expected 0 <= step <= total_steps and total_steps >= 1 (got %r, %r)" % (step, total_steps))
  start = float(config.noise_sigma_start)
  end = float(config.noise_sigma_end)
  if start == 0:
    return 0.0
  if step == total_steps:
    return end
  return start * (end / start) ** (step / total_steps)


def sample_candidates(num_nodes, true_nodes, target_size, generator):
  """Returns a sorted array of node ids holding ``true_nodes`` plus extra
  nodes drawn uniformly without replacement, ``min(target_size, num_nodes)``
  in total"""

  true_nodes = numpy.unique(numpy.asarray(list(true_nodes), dtype=numpy.int64))
  if target_size < len(true_nodes):
    raise ValueError("The candidate set size (%d) is smaller than the number of true nodes (%d)" % (target_size, len(true_nodes)))
  if len(true_nodes) and (true_nodes[0] < 0 or true_nodes[-1] >= num_nodes):
    raise DomainError("True nodes must lie in [0, %d)" % num_nodes)
  size = min(int(target_size), int(num_nodes))
  remaining = numpy.setdiff1d(numpy.arange(num_nodes, dtype=numpy.int64), true_nodes)
  order = torch.randperm(len(remaining), generator=generator).numpy()
  extra = remaining[order[:size - len(true_nodes)]]
  return numpy.sort(numpy.concatenate([true_nodes, extra]))


def batch_nll(model, states, batch, candidates, sigma=0.0, generator=None):
  """Negative log-likelihood of a batch of interactions.

  Keyword Parameters:

  model
    The :py:class:`bob.learn.tempgraph.network.TemporalGraphModel`

  states
    Node states holding every interaction preceding the batch

  batch
    An :py:class:`bob.learn.tempgraph.events.EventStream` slice; its origin
    is the timestamp of the interaction preceding it

  candidates
    Node ids over which the source and destination categoricals are
    normalized; must contain every node of the batch

  sigma
    Standard deviation of the Gaussian noise added to the deltas and to the
    numerical features

  generator
    The :py:class:`torch.Generator` drawing the noise

  Returns: a scalar tensor
  """

  candidates = numpy.asarray(candidates, dtype=numpy.int64)
  position = dict((int(n), i) for i, n in enumerate(candidates))
  try:
    src = torch.tensor([position[int(n)] for n in batch.src], dtype=torch.long)
    dst = torch.tensor([position[int(n)] for n in batch.dst], dtype=torch.long)
  except KeyError as e:
    raise ValueError("Batch node %s is not among the candidates" % e)

  dtype = model.encoder.dtype
  delta = torch.from_numpy(inter_event_deltas(batch)).to(dtype)
  features = torch.from_numpy(numpy.array(batch.features))
  if sigma > 0:
    delta = (delta + sigma * torch.randn(delta.shape, generator=generator, dtype=torch.float64).to(dtype)).clamp_min(0.)
    numerical = [k for k, spec in enumerate(batch.schema) if not spec.is_categorical]
    if numerical:
      noise = torch.zeros_like(features)
      noise[:, numerical] = sigma * torch.randn((len(batch), len(numerical)), generator=generator, dtype=torch.float64)
      features = features + noise

  embeddings = model.encoder(states, candidates, float(batch.t[0]))
  dist = model.decoder.distribution(embeddings, src, dst, delta, features)
  return -interaction_log_likelihood(dist, (src, dst, delta, features)).sum()


class Trainer(object):
  """Stateful training loop over one stream.

  Keyword Parameters:

  stream
    The training :py:class:`bob.learn.tempgraph.events.EventStream`

  config
    The :py:class:`TrainConfig` (taken from ``checkpoint`` if omitted)

  checkpoint
    A :py:class:`bob.learn.tempgraph.checkpoint.Checkpoint` to resume from

  run_log
    Optional path of a text file receiving one record per epoch
  """

  def __init__(self, stream, config=None, checkpoint=None, run_log=None):

    if not len(stream):
      raise ValueError("Cannot train on an empty stream")
    if config is None:
      config = TrainConfig.from_dict(checkpoint.train_config) if checkpoint is not None else TrainConfig()
    if checkpoint is not None:
      if checkpoint.schema != stream.schema:
        raise ValueError("The checkpoint schema '%s' differs from the stream schema '%s'" % (checkpoint.schema, stream.schema))
      if checkpoint.num_nodes != stream.num_nodes:
        raise ValueError("The checkpoint has %d nodes, the stream %d" % (checkpoint.num_nodes, stream.num_nodes))

    # bit-reproducible runs need a single intra-op thread
    torch.set_num_threads(1)

    self.stream = stream
    self.config = config
    self.run_log = run_log
    self.model = build_model(stream.schema, config.model_config(), config.seed)
    self.optimizer = torch.optim.Adam(self.model.parameters(), lr=config.learning_rate)
    self.generator = torch_generator(config.seed, 'train')

    size = len(stream)
    self.batches = [(start, min(start + config.batch_size, size)) for start in range(0, size, config.batch_size)]
    self.total_steps = config.epochs * len(self.batches)

    self.step_count = 0
    self.epoch = 0
    self.batch = 0
    self.states = None
    self.pending = None
    self.history = []
    self.epoch_total = 0.0
    self.epoch_count = 0
    self._epoch_started = time.time()

    if checkpoint is not None:
      self._restore(checkpoint)

  def _restore(self, checkpoint):
    self.model.load_state_dict(checkpoint.model_state)
    if checkpoint.optimizer_state is not None:
      self.optimizer.load_state_dict(checkpoint.optimizer_state)
    if checkpoint.rng_state is not None:
      self.generator.set_state(checkpoint.rng_state)
    self.states = checkpoint.node_states.clone() if checkpoint.node_states is not None else None
    self.pending = checkpoint.pending
    self.step_count = checkpoint.step
    self.epoch = checkpoint.epoch
    self.batch = checkpoint.batch
    self.history = list(checkpoint.history)
    self.epoch_total = checkpoint.epoch_total
    self.epoch_count = checkpoint.epoch_count
    logger.info("Resuming training at epoch %d, batch %d (step %d)", self.epoch, self.batch, self.step_count)

  @property
  def finished(self):
    return self.epoch >= self.config.epochs

  def _target_size(self, true_nodes):
    return max(int(math.ceil(self.config.candidate_multiplier * self.config.batch_size)), len(true_nodes))

  def step(self):
    """Runs one optimizer step on the next batch and returns its loss"""

    if self.finished:
      raise RuntimeError("Training already ran its %d epochs" % self.config.epochs)

    if self.batch == 0:
      self.states = self.model.fresh_states(self.stream.num_nodes, self.stream.origin_time)
      self.pending = None
      self.epoch_total = 0.0
      self.epoch_count = 0
      self._epoch_started = time.time()

    encoder = self.model.encoder
    if self.pending is not None:
      encoder.update_memory(self.states, self.stream.slice(*self.pending))

    start, stop = self.batches[self.batch]
    batch = self.stream.slice(start, stop)
    true_nodes = numpy.union1d(batch.src, batch.dst)
    candidates = sample_candidates(self.stream.num_nodes, true_nodes, self._target_size(true_nodes), self.generator)
    sigma = noise_sigma(self.step_count, self.total_steps, self.config)
    rate = learning_rate_at(self.step_count, len(self.batches), self.config)
    for group in self.optimizer.param_groups:
      group["lr"] = rate

    self.optimizer.zero_grad()
    loss = batch_nll(self.model, self.states, batch, candidates, sigma, self.generator)
    if not torch.isfinite(loss):
      raise TrainingError("Non-finite loss (%s) at batch %d of epoch %d" % (float(loss), self.batch, self.epoch), batch_index=self.batch)
    loss.backward()
    self.optimizer.step()
    self.states.detach_()

    value = float(loss)
    logger.debug("Epoch %d, batch %d: loss %.4f over %d candidates (sigma=%.4g)", self.epoch, self.batch, value, len(candidates), sigma)
    self.pending = (start, stop)
    self.step_count += 1
    self.epoch_total += value
    self.epoch_count += stop - start
    self.batch += 1
    if self.batch == len(self.batches):
      self._finish_epoch(sigma)
    return value

  def _finish_epoch(self, sigma):
    with torch.no_grad():
      self.model.encoder.update_memory(self.states, self.stream.slice(*self.pending))
    self.states.detach_()
    self.pending = None

    mean = self.epoch_total / self.epoch_count
    elapsed = time.time() - self._epoch_started
    self.history.append(mean)
    logger.info("Epoch %d/%d: mean NLL %.4f (sigma=%.4g, %.1f s)", self.epoch + 1, self.config.epochs, mean, sigma, elapsed)
    if self.run_log:
      with open(ensure_parent(self.run_log), 'at') as f:
        f.write('%d, %.6f, %.6g, %.3f\n' % (self.epoch + 1, mean, sigma, elapsed))
    self.epoch += 1
    self.batch = 0

  def run_epoch(self):
    """Runs the remaining batches of the current epoch; returns its mean NLL"""

    epoch = self.epoch
    while not self.finished and self.epoch == epoch:
      self.step()
    return self.history[-1]

  def train(self):
    """Runs every remaining epoch and returns the final checkpoint"""

    while not self.finished:
      self.run_epoch()
    return self.checkpoint()

  def checkpoint(self):
    """A :py:class:`Checkpoint` of the current training position"""

    return checkpoint_io.Checkpoint(
        schema=self.stream.schema,
        model_config=self.config.model_config(),
        model_state=self.model.weights(),
        num_nodes=self.stream.num_nodes,
        origin_time=self.stream.origin_time,
        train_config=self.config.to_dict(),
        node_states=self.states.clone() if self.states is not None else None,
        optimizer_state=copy.deepcopy(self.optimizer.state_dict()),
        rng_state=self.generator.get_state(),
        step=self.step_count,
        epoch=self.epoch,
        batch=self.batch,
        pending=self.pending,
        history=list(self.history),
        epoch_total=self.epoch_total,
        epoch_count=self.epoch_count,
    )


def train(stream, config=None, run_log=None):
  """Trains a fresh network on ``stream`` and returns the final checkpoint"""

  return Trainer(stream, config, run_log=run_log).train()
