#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Probabilistic decoder of interactions.

The joint probability of an interaction is factorized as::

  p(src, dst, t, e) = p(src) p(dst | src) p(t | src, dst) p(e_1 | t, ...) ... p(e_n | e_n-1, ..., t, ...)

Sources and destinations are categorical over candidate nodes, scored from
their temporal embeddings; the inter-event time is exponential and each edge
feature is either categorical or a Gaussian mixture. The time and feature
parameters come out of a recurrent chain seeded by the merged embeddings of
the source and destination.
"""

import logging
import dataclasses

import torch
import torch.nn.functional as F

from .errors import DomainError, ShapeError

logger = logging.getLogger(__name__)


def positive(raw):
  """Softplus, clamped at the smallest normal number of the dtype"""
  return F.softplus(raw).clamp_min(torch.finfo(raw.dtype).tiny)


@dataclasses.dataclass
class CategoricalParams(object):
  """Categorical distribution over a support of size ``logits.shape[-1]``"""

  logits: torch.Tensor

  def __post_init__(self):
    if self.logits.dim() == 0 or self.logits.shape[-1] < 1:
      raise ValueError("A categorical distribution needs a non-empty support")

  @property
  def support(self):
    return self.logits.shape[-1]

  @property
  def log_probs(self):
    return F.log_softmax(self.logits, dim=-1)

  @property
  def probs(self):
    return F.softmax(self.logits, dim=-1)

  def log_prob(self, value):
    """Log-probability of the category index ``value``"""

    value = torch.as_tensor(value)
    if value.is_floating_point():
      if (value != torch.round(value)).any():
        raise DomainError("Categorical values must be integers")
      value = value.long()
    if (value < 0).any() or (value >= self.support).any():
      raise DomainError("Categorical value outside the support [0, %d)" % self.support)
    shape = torch.broadcast_shapes(value.shape, self.logits.shape[:-1])
    log_probs = self.log_probs.expand(shape + (self.support,))
    return log_probs.gather(-1, value.expand(shape).unsqueeze(-1)).squeeze(-1)

  def sample(self, generator, num_samples=1):
    """Draws ``num_samples`` indices (with replacement) per distribution.

    Returns: a long tensor of shape ``batch_shape + (num_samples,)``
    """

    probs = self.probs.detach().reshape(-1, self.support)
    draws = torch.multinomial(probs, num_samples, replacement=True, generator=generator)
    return draws.reshape(self.logits.shape[:-1] + (num_samples,))

  def distribution(self):
    return torch.distributions.Categorical(logits=self.logits)


@dataclasses.dataclass
class ExponentialParam(object):
  """Exponential distribution of rate ``rate`` (density ``rate * exp(-rate x)``)"""

  rate: torch.Tensor

  @property
  def mean(self):
    return 1. / self.rate

  def log_prob(self, value):
    value = torch.as_tensor(value, dtype=self.rate.dtype)
    if (value < 0).any():
      raise DomainError("Inter-event times must be non-negative")
    return torch.log(self.rate) - self.rate * value

  def sample(self, generator):
    rate = self.rate.detach()
    return torch.empty_like(rate).exponential_(1., generator=generator) / rate

  def distribution(self):
    return torch.distributions.Exponential(self.rate)


@dataclasses.dataclass
class GMMParams(object):
  """Gaussian mixture with ``m`` components along the last dimension"""

  means: torch.Tensor
  stds: torch.Tensor
  weights: torch.Tensor

  @property
  def components(self):
    return self.means.shape[-1]

  def distribution(self):
    return torch.distributions.MixtureSameFamily(
        torch.distributions.Categorical(probs=self.weights),
        torch.distributions.Normal(self.means, self.stds))

  def log_prob(self, value):
    value = torch.as_tensor(value, dtype=self.means.dtype)
    components = torch.distributions.Normal(self.means, self.stds).log_prob(value.unsqueeze(-1))
    return torch.logsumexp(torch.log(self.weights) + components, dim=-1)

  def density(self, value):
    return torch.exp(self.log_prob(value))

  def sample(self, generator):
    weights = self.weights.detach().reshape(-1, self.components)
    chosen = torch.multinomial(weights, 1, generator=generator)
    means = self.means.detach().reshape(-1, self.components).gather(1, chosen).squeeze(1)
    stds = self.stds.detach().reshape(-1, self.components).gather(1, chosen).squeeze(1)
    noise = torch.randn(means.shape, generator=generator, dtype=means.dtype)
    return (means + stds * noise).reshape(self.means.shape[:-1])


@dataclasses.dataclass
class InteractionDistribution(object):
  """All distributions describing one (or a batch of) interactions"""

  source: CategoricalParams
  destination: CategoricalParams
  time: ExponentialParam
  feature_heads: list

  def check(self, schema):
    if len(self.feature_heads) != schema.n:
      raise ValueError("Got %d feature heads for %d features" % (len(self.feature_heads), schema.n))
    for spec, head in zip(schema, self.feature_heads):
      if isinstance(head, CategoricalParams) != spec.is_categorical:
        raise ValueError("Head of feature '%s' does not match its kind" % spec.name)


def exponential_param(raw):
  """Turns the raw time-head output (trailing dimension 1) into a rate"""
  return ExponentialParam(positive(raw.squeeze(-1)))


def gmm_params(raw, components):
  """Turns ``3 * m`` raw numbers (means, stds, weights) into a valid mixture"""

  if raw.shape[-1] != 3 * components:
    raise ShapeError("Expected %d raw mixture outputs, got %d" % (3 * components, raw.shape[-1]))
  means, stds, weights = raw.split(components, dim=-1)
  return GMMParams(means, positive(stds), F.softmax(weights, dim=-1))


def log_likelihood_terms(dist, observed):
  """The four log-likelihood terms of an observed interaction.

  Keyword Parameters:

  dist
    The :py:class:`InteractionDistribution`

  observed
    A tuple ``(src, dst, delta, features)``; src and dst index the supports
    of the source and destination distributions, features has the schema
    width on its last dimension

  Returns: a tuple ``(source, destination, time, features)`` of tensors
  """

  src, dst, delta, features = observed
  source = dist.source.log_prob(src)
  destination = dist.destination.log_prob(dst)
  time = dist.time.log_prob(delta)
  features = torch.as_tensor(features, dtype=dist.time.rate.dtype)
  if features.shape[-1] != len(dist.feature_heads):
    raise ValueError("Observed %d feature values for %d feature heads" % (features.shape[-1], len(dist.feature_heads)))
  feature_term = torch.zeros_like(time)
  for k, head in enumerate(dist.feature_heads):
    feature_term = feature_term + head.log_prob(features[..., k])
  return source, destination, time, feature_term


def interaction_log_likelihood(dist, observed):
  """``log p(src) + log p(dst|src) + log p(delta|src,dst) + sum_i log p(e_i|...)``"""

  source, destination, time, features = log_likelihood_terms(dist, observed)
  return source + destination + time + features


def _check_width(z, width):
  if z.shape[-1] != width:
    raise ShapeError("Expected embeddings of dimension %d, got %d" % (width, z.shape[-1]))


class ReshapeModule(torch.nn.Module):
  """Node score ``w_f . ReLU(w_src . z)``"""

  def __init__(self, d_emb, d_h=None):
    super(ReshapeModule, self).__init__()
    d_h = d_h or d_emb
    self.d_emb = d_emb
    self.w_src = torch.nn.Linear(d_emb, d_h, bias=False)
    self.w_f = torch.nn.Linear(d_h, 1, bias=False)

  def forward(self, z):
    _check_width(z, self.d_emb)
    return self.w_f(F.relu(self.w_src(z))).squeeze(-1)


class ProductModule(torch.nn.Module):
  """Pair score ``w_f . ReLU(w_src . z_src + w_dst . z_dst)``"""

  def __init__(self, d_emb, d_h=None):
    super(ProductModule, self).__init__()
    d_h = d_h or d_emb
    self.d_emb = d_emb
    self.w_src = torch.nn.Linear(d_emb, d_h, bias=False)
    self.w_dst = torch.nn.Linear(d_emb, d_h, bias=False)
    self.w_f = torch.nn.Linear(d_h, 1, bias=False)

  def forward(self, z_src, z_dst):
    _check_width(z_src, self.d_emb)
    _check_width(z_dst, self.d_emb)
    return self.w_f(F.relu(self.w_src(z_src) + self.w_dst(z_dst))).squeeze(-1)


class MergeModule(torch.nn.Module):
  """Initial chain state ``w_f . ReLU(ReLU(w_src . z_src) + ReLU(w_dst . z_dst))``"""

  def __init__(self, d_emb, d_h0, d_h=None):
    super(MergeModule, self).__init__()
    d_h = d_h or d_emb
    self.d_emb = d_emb
    self.w_src = torch.nn.Linear(d_emb, d_h, bias=False)
    self.w_dst = torch.nn.Linear(d_emb, d_h, bias=False)
    self.w_f = torch.nn.Linear(d_h, d_h0, bias=False)

  def forward(self, z_src, z_dst):
    _check_width(z_src, self.d_emb)
    _check_width(z_dst, self.d_emb)
    return self.w_f(F.relu(F.relu(self.w_src(z_src)) + F.relu(self.w_dst(z_dst))))


class TimeMsgModule(torch.nn.Module):
  """Recurrent chain producing the time rate and the feature distributions.

  Step 0 consumes a learned start token and yields the exponential rate; step
  ``i`` consumes the value of variable ``i - 1`` (the time for ``i = 1``) and
  yields the distribution of feature ``i``.
  """

  def __init__(self, schema, d_h0, d_in=None, gmm_components=3):
    super(TimeMsgModule, self).__init__()
    d_in = d_in or d_h0
    self.schema = schema
    self.d_h0 = d_h0
    self.d_in = d_in
    self.gmm_components = gmm_components

    self.start = torch.nn.Parameter(torch.zeros(d_in))
    self.time_input = torch.nn.Linear(1, d_in)
    self.feature_inputs = torch.nn.ModuleList([torch.nn.Linear(spec.width, d_in) for spec in schema.features[:-1]])
    self.cell = torch.nn.GRUCell(d_in, d_h0)
    self.time_head = torch.nn.Linear(d_h0, 1)
    self.feature_heads = torch.nn.ModuleList([
        torch.nn.Linear(d_h0, spec.cardinality if spec.is_categorical else 3 * gmm_components)
        for spec in schema])

  def _input(self, k, value):
    """Embeds the realized value of variable ``k`` (-1 is the time)"""

    if k < 0:
      delta = torch.as_tensor(value, dtype=self.start.dtype)
      return self.time_input(torch.log1p(delta).unsqueeze(-1))
    spec = self.schema[k]
    if spec.is_categorical:
      code = F.one_hot(torch.as_tensor(value).long(), spec.cardinality).to(self.start.dtype)
    else:
      code = torch.as_tensor(value, dtype=self.start.dtype).unsqueeze(-1)
    return self.feature_inputs[k](code)

  def _head(self, k, hidden):
    raw = self.feature_heads[k](hidden)
    if self.schema[k].is_categorical:
      return CategoricalParams(raw)
    return gmm_params(raw, self.gmm_components)

  def _first_step(self, h0):
    if h0.shape[-1] != self.d_h0:
      raise ShapeError("Expected an initial state of dimension %d, got %d" % (self.d_h0, h0.shape[-1]))
    start = self.start.expand(h0.shape[:-1] + (self.d_in,))
    hidden = self.cell(start, h0)
    return hidden, exponential_param(self.time_head(hidden))

  def forward(self, h0, delta=None, realized=None):
    """Head parameters with every step conditioned on the observed time and
    features.

    Returns: ``(ExponentialParam, [feature head params])``
    """

    n = self.schema.n
    if realized is not None:
      realized = torch.as_tensor(realized, dtype=torch.float64)
      if realized.shape[-1] != n:
        raise ValueError("Expected %d realized feature values, got %d" % (n, realized.shape[-1]))
    if n and (delta is None or realized is None):
      raise ValueError("The time and the realized features are needed to condition the feature chain")

    hidden, time = self._first_step(h0)
    heads = []
    for k in range(n):
      value = delta if k == 0 else realized[..., k - 1]
      hidden = self.cell(self._input(k - 1, value), hidden)
      heads.append(self._head(k, hidden))
    return time, heads

  def sample(self, h0, generator):
    """Samples the time and the features, feeding each draw to the next step.

    Returns: ``(delta, features, time params, head params)`` where features
    is a float64 ``(..., n)`` tensor
    """

    hidden, time = self._first_step(h0)
    delta = time.sample(generator)
    values = []
    heads = []
    previous = delta
    for k in range(self.schema.n):
      hidden = self.cell(self._input(k - 1, previous), hidden)
      head = self._head(k, hidden)
      if isinstance(head, CategoricalParams):
        previous = head.sample(generator).squeeze(-1)
      else:
        previous = head.sample(generator)
      heads.append(head)
      values.append(previous.to(torch.float64))
    if values:
      features = torch.stack(values, dim=-1)
    else:
      features = torch.zeros(delta.shape + (0,), dtype=torch.float64)
    return delta, features, time, heads


class InteractionDecoder(torch.nn.Module):
  """Bundles the four decoder modules.

  Keyword Parameters:

  schema
    Edge feature schema

  d_emb
    Width of the temporal embeddings

  d_h0
    Hidden size of the recurrent chain (defaults to ``d_emb``)

  gmm_components
    Number of mixture components of numerical feature heads
  """

  def __init__(self, schema, d_emb, d_h0=None, gmm_components=3):
    super(InteractionDecoder, self).__init__()
    d_h0 = d_h0 or d_emb
    self.schema = schema
    self.reshape = ReshapeModule(d_emb)
    self.product = ProductModule(d_emb)
    self.merge = MergeModule(d_emb, d_h0)
    self.time_msg = TimeMsgModule(schema, d_h0, gmm_components=gmm_components)

  def reshape_score(self, z):
    return self.reshape(z)

  def product_score(self, z_src, z_dst):
    return self.product(z_src, z_dst)

  def source_distribution(self, embeddings):
    """Categorical over candidates, from the rows of ``embeddings``"""

    if embeddings.dim() < 2 or embeddings.shape[-2] == 0:
      raise ValueError("The candidate list must not be empty")
    return CategoricalParams(self.reshape(embeddings))

  def destination_distribution(self, z_src, candidates):
    """Categorical over candidates for the source(s) ``z_src``.

    ``z_src`` may be a single embedding or a ``(batch, d_emb)`` matrix, in
    which case the result has one row per source.
    """

    if candidates.dim() < 2 or candidates.shape[-2] == 0:
      raise ValueError("The candidate list must not be empty")
    return CategoricalParams(self.product(z_src.unsqueeze(-2), candidates))

  def time_msg_params(self, h0, delta=None, realized=None):
    return self.time_msg(h0, delta, realized)

  def distribution(self, candidates, src, dst, delta, realized):
    """The :py:class:`InteractionDistribution` of a batch of observed
    interactions; ``src``/``dst`` index rows of ``candidates``"""

    source = self.source_distribution(candidates)
    z_src = candidates[src]
    z_dst = candidates[dst]
    destination = self.destination_distribution(z_src, candidates)
    time, heads = self.time_msg(self.merge(z_src, z_dst), delta, realized)
    return InteractionDistribution(source, destination, time, heads)
