#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""This module provides the Database interface allowing the user to query the
dataset catalog in the most obvious ways.
"""

import os

import numpy
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from . import models
from .events import EventStream, FeatureSchema


class Database(object):
  """The dataset class opens and maintains a connection opened to a catalog.

  It lists the ingested datasets and rebuilds their interaction streams,
  either whole or one chronological partition at a time.

  Keyword Parameters:

  path
    The SQLite file of the catalog, as filled by :py:func:`bob.learn.tempgraph.create.ingest`
  """

  def __init__(self, path):
    if not os.path.exists(path):
      raise IOError("Catalog '%s' does not exist" % path)
    self.path = path
    self.engine = create_engine('sqlite:///%s' % path)
    self.session = sessionmaker(bind=self.engine)()

  def close(self):
    self.session.close()
    self.engine.dispose()

  def __enter__(self):
    return self

  def __exit__(self, *exc):
    self.close()

  def query(self, *args):
    return self.session.query(*args)

  def check_parameter_for_validity(self, parameter, parameter_description, valid_parameters):
    """Checks that ``parameter`` is one of ``valid_parameters``"""

    if parameter not in valid_parameters:
      raise ValueError("Invalid %s '%s'. Valid values are %s" % (parameter_description, parameter, list(valid_parameters)))
    return parameter

  def datasets(self):
    """Returns the list of ingested datasets"""

    return list(self.query(models.Dataset).order_by(models.Dataset.name))

  def dataset_names(self):
    """Returns the names of all ingested datasets"""

    return [str(k.name) for k in self.datasets()]

  def has_dataset(self, name):
    """Tells if a certain dataset is available"""

    return self.query(models.Dataset).filter(models.Dataset.name == name).count() != 0

  def _dataset(self, name):
    self.check_parameter_for_validity(name, "dataset", self.dataset_names())
    return self.query(models.Dataset).filter(models.Dataset.name == name).one()

  def partition_names(self, name):
    """Returns the partitions of a dataset, in chronological order"""

    return [str(k.name) for k in self._dataset(name).partitions]

  def schema(self, name):
    """Returns the :py:class:`bob.learn.tempgraph.events.FeatureSchema` of a dataset"""

    return FeatureSchema.parse(self._dataset(name).schema)

  def node_labels(self, name):
    """Returns the original label of every dense node id"""

    return [str(k.label) for k in self._dataset(name).nodes]

  def stream(self, name, partition=None):
    """Rebuilds the interactions of a dataset.

    Keyword Parameters:

    name
      The dataset name

    partition
      If given, one of :py:meth:`partition_names`; the stream then holds only
      that partition and its origin is the timestamp of the interaction
      preceding it

    Returns: an :py:class:`bob.learn.tempgraph.events.EventStream`
    """

    dataset = self._dataset(name)
    schema = FeatureSchema.parse(dataset.schema)
    q = self.query(models.Interaction).filter(models.Interaction.dataset_id == dataset.id)
    origin = dataset.origin_time

    if partition is not None:
      self.check_parameter_for_validity(partition, "partition", self.partition_names(name))
      part = [k for k in dataset.partitions if k.name == partition][0]
      q = q.filter(models.Interaction.position >= part.start, models.Interaction.position < part.stop)
      if part.start > 0:
        previous = self.query(models.Interaction).filter(models.Interaction.dataset_id == dataset.id,
            models.Interaction.position == part.start - 1).one()
        origin = previous.t

    rows = q.order_by(models.Interaction.position).all()
    features = numpy.array([k.feature_values() for k in rows], dtype=numpy.float64).reshape(len(rows), schema.n)
    return EventStream([k.src for k in rows], [k.dst for k in rows], [k.t for k in rows], features,
        schema, dataset.num_nodes, origin, self.node_labels(name))
