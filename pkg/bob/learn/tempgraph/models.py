#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Table models of the dataset catalog.
"""

import json

from sqlalchemy import Column, Integer, Float, String, Text, Enum, ForeignKey, UniqueConstraint
from sqlalchemy.orm import declarative_base, relationship, backref

Base = declarative_base()


class Dataset(Base):
  """An ingested interaction log"""

  __tablename__ = 'dataset'

  # Key identifier for the dataset
  id = Column(Integer, primary_key=True)
  # Name used to refer to the dataset
  name = Column(String(64), unique=True)
  # Size of the dense node universe
  num_nodes = Column(Integer)
  # Reference time of the first inter-event delta
  origin_time = Column(Float)
  # Feature schema, in its textual form
  schema = Column(Text)
  # File the dataset was ingested from
  source = Column(Text)

  def __init__(self, name, num_nodes, origin_time, schema, source):
    self.name = name
    self.num_nodes = num_nodes
    self.origin_time = origin_time
    self.schema = schema
    self.source = source

  def __repr__(self):
    return "Dataset('%s', %d nodes)" % (self.name, self.num_nodes)


class Node(Base):
  """Maps the dense id of a node to its label in the original file"""

  __tablename__ = 'node'
  __table_args__ = (UniqueConstraint('dataset_id', 'dense_id'),)

  id = Column(Integer, primary_key=True)
  dataset_id = Column(Integer, ForeignKey('dataset.id'))  # for SQL
  dense_id = Column(Integer)
  label = Column(String(128))

  # for Python: A direct link to the dataset
  dataset = relationship("Dataset", backref=backref("nodes", order_by=dense_id, cascade="all, delete-orphan"))

  def __init__(self, dataset, dense_id, label):
    self.dataset = dataset
    self.dense_id = dense_id
    self.label = label

  def __repr__(self):
    return "Node(%d, '%s')" % (self.dense_id, self.label)


class Interaction(Base):
  """One row of an ingested interaction log"""

  __tablename__ = 'interaction'
  __table_args__ = (UniqueConstraint('dataset_id', 'position'),)

  id = Column(Integer, primary_key=True)
  dataset_id = Column(Integer, ForeignKey('dataset.id'))  # for SQL
  # Chronological position inside the dataset
  position = Column(Integer)
  src = Column(Integer)
  dst = Column(Integer)
  t = Column(Float)
  # Feature values, as a JSON list
  features = Column(Text)

  dataset = relationship("Dataset", backref=backref("interactions", order_by=position, cascade="all, delete-orphan"))

  def __init__(self, dataset, position, src, dst, t, features):
    self.dataset = dataset
    self.position = position
    self.src = src
    self.dst = dst
    self.t = t
    self.features = json.dumps([float(v) for v in features])

  def feature_values(self):
    return json.loads(self.features)

  def __repr__(self):
    return "Interaction(%d, %d -> %d at %r)" % (self.position, self.src, self.dst, self.t)


class Partition(Base):
  """A chronological partition of a dataset, as the range ``[start, stop)``
  of interaction positions"""

  __tablename__ = 'partition'
  __table_args__ = (UniqueConstraint('dataset_id', 'name'),)

  id = Column(Integer, primary_key=True)
  dataset_id = Column(Integer, ForeignKey('dataset.id'))  # for SQL
  name_choices = ('train', 'val', 'test')
  name = Column(Enum(*name_choices))
  start = Column(Integer)
  stop = Column(Integer)

  dataset = relationship("Dataset", backref=backref("partitions", order_by=start, cascade="all, delete-orphan"))

  def __init__(self, dataset, name, start, stop):
    self.dataset = dataset
    self.name = name
    self.start = start
    self.stop = stop

  def __repr__(self):
    return "Partition('%s', %d:%d)" % (self.name, self.start, self.stop)
