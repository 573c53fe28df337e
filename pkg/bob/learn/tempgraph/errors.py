#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Exceptions raised by the temporal graph toolkit.

Every exception also derives from the closest built-in type, so callers can
catch :py:class:`ValueError` or :py:class:`RuntimeError` without importing
this module.
"""


class TempGraphError(Exception):
  """Base class of all errors raised by this package"""


class ParseError(TempGraphError, ValueError):
  """A row of an interaction file could not be parsed"""

  def __init__(self, message, line=None):
    if line is not None:
      message = "line %d: %s" % (line, message)
    super(ParseError, self).__init__(message)
    self.line = line


class OrderingError(TempGraphError, ValueError):
  """Timestamps are not chronologically ordered"""

  def __init__(self, message, line=None):
    if line is not None:
      message = "line %d: %s" % (line, message)
    super(OrderingError, self).__init__(message)
    self.line = line


class SchemaError(TempGraphError, ValueError):
  """Feature values do not match the declared feature schema"""


class ShapeError(TempGraphError, ValueError):
  """An input has the wrong dimensionality"""


class DomainError(TempGraphError, ValueError):
  """A value lies outside the support of a distribution or node universe"""


class TemporalConsistencyError(TempGraphError, RuntimeError):
  """An interaction is older than the memory it should update"""


class CheckpointError(TempGraphError, RuntimeError):
  """A checkpoint file is corrupt or of an unsupported version"""


class TrainingError(TempGraphError, RuntimeError):
  """Training diverged"""

  def __init__(self, message, batch_index=None):
    super(TrainingError, self).__init__(message)
    self.batch_index = batch_index


class GenerationError(TempGraphError, RuntimeError):
  """Generation cannot make progress"""
