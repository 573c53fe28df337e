#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Small helpers shared by the training, generation and command-line code"""

import os
import zlib
import logging

import numpy
import torch

logger = logging.getLogger(__name__)

# names of the independent random sub-streams derived from a single seed
SEED_STREAMS = ('data', 'init', 'train', 'generate', 'evaluate')


def derive_seed(seed, stream):
  """Returns the integer seed of the named sub-stream of ``seed``.

  Keyword Parameters:

  seed
    The user supplied seed (non-negative integer)

  stream
    One of the sub-stream names in :py:data:`SEED_STREAMS`
  """

  if stream not in SEED_STREAMS:
    raise ValueError("Unknown random stream '%s'; valid choices are %s" % (stream, SEED_STREAMS))
  sequence = numpy.random.SeedSequence([int(seed), zlib.crc32(stream.encode('ascii'))])
  return int(sequence.generate_state(1, dtype=numpy.uint64)[0] >> numpy.uint64(1))


def torch_generator(seed, stream):
  """Returns a CPU :py:class:`torch.Generator` seeded from the named sub-stream"""

  generator = torch.Generator()
  generator.manual_seed(derive_seed(seed, stream))
  return generator


def numpy_generator(seed, stream):
  """Returns a :py:class:`numpy.random.Generator` seeded from the named sub-stream"""

  return numpy.random.default_rng(derive_seed(seed, stream))


def ensure_dir(dirname):
  """Creates the directory dirname if it does not already exist.

  An exception is thrown if a file (rather than a directory) already exists.
  """
  try:
    os.makedirs(dirname)
  except OSError:
    if os.path.isdir(dirname): pass
    else: raise


def ensure_parent(path):
  """Creates the directory holding ``path``, if any"""

  parent = os.path.dirname(os.path.abspath(path))
  ensure_dir(parent)
  return path


def setup_logging(verbosity):
  """Configures the package logger for the given ``-v`` count"""

  level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity or 0, logging.DEBUG)
  package_logger = logging.getLogger('bob.learn.tempgraph')
  if not package_logger.handlers:
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter('%(name)s@%(asctime)s -- %(levelname)s: %(message)s'))
    package_logger.addHandler(handler)
  package_logger.setLevel(level)
  return package_logger
