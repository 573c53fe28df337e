#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Configuration files and environment overrides.

A configuration file is a flat YAML mapping whose keys are fields of the
configuration dataclasses (:py:class:`TrainConfig`, :py:class:`GenerationConfig`,
:py:class:`EvaluationConfig`, :py:class:`ToyConfig`), plus an optional
``schema`` string. Keys shared by several dataclasses (``seed``,
``batch_size``) apply to all of them. Command-line flags override file values,
which override the dataclass defaults.
"""

import os
import logging
import dataclasses

import yaml

from .trainer import TrainConfig
from .generator import GenerationConfig
from .evaluation import EvaluationConfig
from .toy import ToyConfig

logger = logging.getLogger(__name__)

DATA_DIR_VARIABLE = 'TEMPGRAPH_DATA_DIR'
OUTPUT_DIR_VARIABLE = 'TEMPGRAPH_OUTPUT_DIR'

CONFIG_CLASSES = (TrainConfig, GenerationConfig, EvaluationConfig, ToyConfig)
EXTRA_KEYS = ('schema',)


def known_keys():
  keys = set(EXTRA_KEYS)
  for cls in CONFIG_CLASSES:
    keys.update(f.name for f in dataclasses.fields(cls))
  return keys


def read_config(path):
  """Reads a flat configuration mapping (an empty mapping if ``path`` is
  None)"""

  if path is None:
    return {}
  with open(path, 'rt') as f:
    values = yaml.safe_load(f)
  if values is None:
    return {}
  if not isinstance(values, dict):
    raise ValueError("Configuration file '%s' must hold a key: value mapping" % path)
  valid = known_keys()
  for key, value in values.items():
    if key not in valid:
      raise ValueError("Unknown configuration key '%s' in '%s'; valid keys are %s" % (key, path, sorted(valid)))
    if isinstance(value, dict):
      raise ValueError("Configuration key '%s' in '%s' must hold a plain value" % (key, path))
  logger.debug("Read %d configuration values from '%s'", len(values), path)
  return values


def _coerce(field, value):
  """YAML reads ``1e-4`` as a string; numbers are converted to the field type"""

  if field.type is float and isinstance(value, (int, str)) and not isinstance(value, bool):
    return float(value)
  if field.type is int and isinstance(value, str):
    return int(value)
  return value


def build(cls, values=None, **overrides):
  """Instantiates the dataclass ``cls`` from file values and overrides; None
  overrides are ignored"""

  fields = dict((f.name, f) for f in dataclasses.fields(cls))
  arguments = dict((k, v) for k, v in (values or {}).items() if k in fields)
  for key, value in overrides.items():
    if key not in fields:
      raise ValueError("'%s' is not a field of %s" % (key, cls.__name__))
    if value is not None:
      arguments[key] = value
  try:
    arguments = dict((k, _coerce(fields[k], v)) for k, v in arguments.items())
  except ValueError:
    raise ValueError("Configuration values of %s have the wrong type: %s" % (cls.__name__, arguments))
  return cls(**arguments)


def _prefixed(path, variable):
  prefix = os.environ.get(variable)
  if path is None or not prefix or os.path.isabs(path):
    return path
  return os.path.join(prefix, path)


def input_path(path):
  """Resolves a relative input path against ``$TEMPGRAPH_DATA_DIR``"""
  return _prefixed(path, DATA_DIR_VARIABLE)


def output_path(path):
  """Resolves a relative output path against ``$TEMPGRAPH_OUTPUT_DIR``"""
  return _prefixed(path, OUTPUT_DIR_VARIABLE)
