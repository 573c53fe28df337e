#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""This script ingests interaction logs into a dataset catalog.
"""

import os
import logging

from sqlalchemy import create_engine
from sqlalchemy.orm import Session

from .models import Base, Dataset, Node, Interaction, Partition
from .events import FeatureSchema, load_events, write_events, chronological_split
from .config import read_config, input_path, output_path
from .utils import ensure_dir, ensure_parent

logger = logging.getLogger(__name__)


def create_tables(engine):
  """Creates all necessary tables (only does something the first time)"""

  Base.metadata.create_all(engine)


def ingest(catalog_path, name, stream, f_train=0.70, f_val=0.15, source='', recreate=False):
  """Stores a stream and its chronological split in a catalog.

  Keyword Parameters:

  catalog_path
    The SQLite file of the catalog (created if needed)

  name
    Name of the new dataset

  stream
    The :py:class:`bob.learn.tempgraph.events.EventStream` to store

  f_train, f_val
    Split fractions, see :py:func:`bob.learn.tempgraph.events.chronological_split`

  source
    The file the stream was read from

  recreate
    If set, a dataset of the same name is replaced; otherwise it is an error

  Returns: the ``(train, val, test)`` partitions
  """

  train, val, test = chronological_split(stream, f_train, f_val)

  engine = create_engine('sqlite:///%s' % ensure_parent(catalog_path))
  create_tables(engine)
  session = Session(engine)
  try:
    existing = session.query(Dataset).filter(Dataset.name == name).first()
    if existing is not None:
      if not recreate:
        raise ValueError("Dataset '%s' already exists in '%s'; re-create it to replace it" % (name, catalog_path))
      logger.info("Replacing dataset '%s'...", name)
      session.delete(existing)
      session.flush()

    dataset = Dataset(name, stream.num_nodes, stream.origin_time, str(stream.schema), source)
    session.add(dataset)
    labels = stream.node_labels or ['%d' % k for k in range(stream.num_nodes)]
    session.add_all([Node(dataset, k, label) for k, label in enumerate(labels)])
    session.add_all([Interaction(dataset, i, int(s), int(d), float(t), f)
        for i, (s, d, t, f) in enumerate(zip(stream.src, stream.dst, stream.t, stream.features))])
    start = 0
    for part_name, part in zip(Partition.name_choices, (train, val, test)):
      session.add(Partition(dataset, part_name, start, start + len(part)))
      start += len(part)
    session.commit()
  finally:
    session.close()
    engine.dispose()

  logger.info("Ingested dataset '%s' (%d interactions: %d train, %d val, %d test) into '%s'",
      name, len(stream), len(train), len(val), len(test), catalog_path)
  return train, val, test


# Driver API
# ==========

def create(args):
  """Ingests an interaction log into a dataset catalog"""

  values = read_config(input_path(args.config))
  schema = FeatureSchema.parse(args.schema if args.schema is not None else values.get('schema', ''))
  data = input_path(args.data)
  catalog = output_path(args.catalog)

  stream = load_events(data, schema, bipartite=args.bipartite)
  parts = ingest(catalog, args.name, stream, args.f_train, args.f_val, source=os.path.abspath(data), recreate=args.recreate)

  if args.export_dir:
    directory = output_path(args.export_dir)
    ensure_dir(directory)
    for part_name, part in zip(Partition.name_choices, parts):
      write_events(part, os.path.join(directory, '%s.csv' % part_name))
  return 0


def add_command(subparsers):
  """Add specific subcommands that the action "ingest" can use"""

  parser = subparsers.add_parser('ingest', help=create.__doc__)

  parser.add_argument('-d', '--data', required=True, metavar='FILE', help="The interaction log (CSV) to ingest")
  parser.add_argument('-s', '--schema', metavar='SCHEMA', help="Feature schema, e.g. 'category=categorical:2,value=numerical' (may also be given in the configuration file)")
  parser.add_argument('-c', '--config', metavar='FILE', help="Configuration file (flat YAML)")
  parser.add_argument('-C', '--catalog', required=True, metavar='FILE', help="The catalog (SQLite file) to ingest into")
  parser.add_argument('-n', '--name', required=True, help="Name of the new dataset")
  parser.add_argument('--f-train', type=float, default=0.70, help="Fraction of training interactions (defaults to %(default)s)")
  parser.add_argument('--f-val', type=float, default=0.15, help="Fraction of validation interactions (defaults to %(default)s)")
  parser.add_argument('-b', '--bipartite', action='store_true', help="Source and destination columns use separate id namespaces")
  parser.add_argument('-x', '--export-dir', metavar='DIR', help="If given, train.csv, val.csv and test.csv (dense ids) are written into this directory")
  parser.add_argument('-R', '--recreate', action='store_true', help="If set, I'll first erase a dataset of the same name")
  parser.add_argument('-v', '--verbose', action='count', default=0, help="Increases the verbosity (may be repeated)")
  parser.set_defaults(func=create) #action
