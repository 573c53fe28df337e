#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Commands of the temporal graph toolkit.
"""

import sys
import json
import logging
import argparse

from . import checkpoint as checkpoint_io
from .config import read_config, build, input_path, output_path
from .events import EventStream, FeatureSchema, load_events, write_events
from .errors import TempGraphError
from .evaluation import EvaluationConfig, compare_streams, inductive_negative_sampling, \
    standard_negative_sampling, link_prediction_report
from .generator import GenerationConfig, generate, replay, score_stream
from .network import model_from_checkpoint
from .toy import ToyConfig, make_toy
from .trainer import TrainConfig, Trainer
from .utils import setup_logging, numpy_generator, ensure_parent

logger = logging.getLogger(__name__)


def _schema(args, values):
  text = args.schema if getattr(args, 'schema', None) is not None else values.get('schema', '')
  return FeatureSchema.parse(text)


def _catalog_stream(args, partition=None):
  from .query import Database
  with Database(input_path(args.catalog)) as db:
    return db.stream(args.dataset, partition)


def _file_stream(path, schema, num_nodes=None):
  return load_events(input_path(path), schema, keep_ids=True, num_nodes=num_nodes)


def _write_report(report, path):
  with open(ensure_parent(output_path(path)), 'wt') as f:
    json.dump(report, f, indent=2, sort_keys=True)
    f.write('\n')
  logger.info("Wrote report to '%s'", path)


def toy_command(args):
  """Samples the planted-preference toy dataset"""

  values = read_config(input_path(args.config))
  config = build(ToyConfig, values, seed=args.seed, n_events=args.events)
  make_toy(config, output_path(args.out))
  return 0


def train_command(args):
  """Trains a generative model on an interaction stream"""

  values = read_config(input_path(args.config))
  if args.catalog:
    stream = _catalog_stream(args, args.partition)
  elif args.data:
    stream = _file_stream(args.data, _schema(args, values))
  else:
    raise ValueError("A training stream is needed (--data, or --catalog with --dataset)")

  resume = None
  if args.resume:
    resume = checkpoint_io.load(input_path(args.resume))
    config = build(TrainConfig, resume.train_config, epochs=args.epochs)
  else:
    config = build(TrainConfig, values, epochs=args.epochs, seed=args.seed)

  trainer = Trainer(stream, config, checkpoint=resume, run_log=output_path(args.run_log))
  checkpoint_io.save(trainer.train(), output_path(args.out))
  return 0


def generate_command(args):
  """Generates a synthetic interaction stream from a trained model"""

  checkpoint = checkpoint_io.load(input_path(args.checkpoint))
  values = read_config(input_path(args.config))
  num_interactions = args.num_interactions
  if args.reference:
    num_interactions = len(_file_stream(args.reference, checkpoint.schema))
  if num_interactions is None and 'num_interactions' not in values:
    raise ValueError("The number of interactions to generate is needed (--num-interactions or --reference)")
  config = build(GenerationConfig, values, num_interactions=num_interactions, seed=args.seed)
  write_events(generate(checkpoint, config), ensure_parent(output_path(args.out)))
  return 0


def evaluate_command(args):
  """Compares a synthetic stream with a real one"""

  values = read_config(input_path(args.config))
  if args.checkpoint:
    schema = checkpoint_io.load(input_path(args.checkpoint)).schema
  elif args.catalog:
    from .query import Database
    with Database(input_path(args.catalog)) as db:
      schema = db.schema(args.dataset)
  else:
    schema = _schema(args, values)

  if args.catalog:
    real = _catalog_stream(args, args.partition)
  else:
    if not args.real:
      raise ValueError("A real stream is needed (--real, or --catalog with --dataset)")
    real = _file_stream(args.real, schema)
  synth = _file_stream(args.synth, schema)

  config = build(EvaluationConfig, values)
  _write_report(compare_streams(real, synth, config), args.report)
  if args.plots:
    from .plot import write_plots
    write_plots(real, synth, output_path(args.plots), config)
  return 0


def linkpred_command(args):
  """Scores link prediction on a test stream with a trained model"""

  checkpoint = checkpoint_io.load(input_path(args.checkpoint))
  values = read_config(input_path(args.config))
  config = build(EvaluationConfig, values, sampling=args.sampling, seed=args.seed)
  batch_size = int(values.get('batch_size', checkpoint.train_config.get('batch_size', 200)))

  def partition(path, name):
    if path:
      return _file_stream(path, checkpoint.schema, checkpoint.num_nodes)
    if args.catalog:
      return _catalog_stream(args, name)
    return None

  test = partition(args.test, 'test')
  if test is None:
    raise ValueError("A test stream is needed (--test, or --catalog with --dataset)")
  train = partition(args.train, 'train')
  if train is None:
    train = EventStream([], [], [], None, checkpoint.schema, checkpoint.num_nodes)
  history = partition(args.history, 'val')

  model = model_from_checkpoint(checkpoint)
  if checkpoint.node_states is not None:
    states = checkpoint.node_states.clone()
  else:
    states = model.fresh_states(checkpoint.num_nodes, checkpoint.origin_time)
  if history is not None and len(history):
    replay(model, states, history, batch_size)

  rng = numpy_generator(config.seed, 'evaluate')
  if config.sampling == 'inductive':
    samples = inductive_negative_sampling(train, test, rng)
  else:
    samples = standard_negative_sampling(test, rng, train)
  labels, scores = score_stream(checkpoint, states, test, samples, batch_size, model)

  report = link_prediction_report(labels, scores)
  report['sampling'] = config.sampling
  _write_report(report, args.report)
  return 0


def _add_verbose(parser):
  parser.add_argument('-v', '--verbose', action='count', default=0, help="Increases the verbosity (may be repeated)")


def _add_catalog(parser, partition=True):
  parser.add_argument('-C', '--catalog', metavar='FILE', help="Dataset catalog (SQLite file) to read from")
  parser.add_argument('-D', '--dataset', help="Name of the dataset inside the catalog")
  if partition:
    parser.add_argument('-P', '--partition', choices=('train', 'val', 'test'), help="Restricts the dataset to one of its partitions")


def build_parser():
  """The argument parser of all commands"""

  parser = argparse.ArgumentParser(prog='tempgraph', description=__doc__,
      formatter_class=argparse.RawDescriptionHelpFormatter)
  subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
  subparsers.required = True

  # the "make-toy" action
  sub = subparsers.add_parser('make-toy', help=toy_command.__doc__)
  sub.add_argument('-o', '--out', required=True, metavar='FILE', help="Output interaction log (CSV)")
  sub.add_argument('-c', '--config', metavar='FILE', help="Configuration file (flat YAML)")
  sub.add_argument('-S', '--seed', type=int, help="Random seed")
  sub.add_argument('-e', '--events', type=int, help="Number of interactions")
  _add_verbose(sub)
  sub.set_defaults(func=toy_command) #action

  # the "ingest" action
  from .create import add_command as ingest_command
  ingest_command(subparsers)

  # the "train" action
  sub = subparsers.add_parser('train', help=train_command.__doc__)
  sub.add_argument('-d', '--data', metavar='FILE', help="Training interaction log (CSV, dense node ids)")
  _add_catalog(sub)
  sub.add_argument('-s', '--schema', metavar='SCHEMA', help="Feature schema (may also be given in the configuration file)")
  sub.add_argument('-c', '--config', metavar='FILE', help="Configuration file (flat YAML)")
  sub.add_argument('-o', '--out', required=True, metavar='FILE', help="Output checkpoint")
  sub.add_argument('-r', '--run-log', metavar='FILE', help="If given, one line per epoch is appended to this file")
  sub.add_argument('-e', '--epochs', type=int, help="Number of epochs")
  sub.add_argument('-S', '--seed', type=int, help="Random seed")
  sub.add_argument('--resume', metavar='FILE', help="Continues training from this checkpoint")
  _add_verbose(sub)
  sub.set_defaults(func=train_command) #action

  # the "generate" action
  sub = subparsers.add_parser('generate', help=generate_command.__doc__)
  sub.add_argument('-k', '--checkpoint', required=True, metavar='FILE', help="Trained checkpoint")
  sub.add_argument('-o', '--out', required=True, metavar='FILE', help="Output interaction log (CSV)")
  group = sub.add_mutually_exclusive_group()
  group.add_argument('-n', '--num-interactions', type=int, help="Number of interactions to generate")
  group.add_argument('-R', '--reference', metavar='FILE', help="Generates as many interactions as this log holds")
  sub.add_argument('-c', '--config', metavar='FILE', help="Configuration file (flat YAML)")
  sub.add_argument('-S', '--seed', type=int, help="Random seed")
  _add_verbose(sub)
  sub.set_defaults(func=generate_command) #action

  # the "evaluate" action
  sub = subparsers.add_parser('evaluate', help=evaluate_command.__doc__)
  sub.add_argument('-r', '--real', metavar='FILE', help="Real interaction log (CSV, dense node ids)")
  _add_catalog(sub)
  sub.add_argument('-y', '--synth', required=True, metavar='FILE', help="Synthetic interaction log (CSV)")
  sub.add_argument('-s', '--schema', metavar='SCHEMA', help="Feature schema of both logs")
  sub.add_argument('-k', '--checkpoint', metavar='FILE', help="Takes the feature schema from this checkpoint")
  sub.add_argument('-o', '--report', required=True, metavar='FILE', help="Output report (JSON)")
  sub.add_argument('-p', '--plots', metavar='DIR', help="If given, feature figures are written into this directory")
  sub.add_argument('-c', '--config', metavar='FILE', help="Configuration file (flat YAML)")
  _add_verbose(sub)
  sub.set_defaults(func=evaluate_command) #action

  # the "linkpred" action
  sub = subparsers.add_parser('linkpred', help=linkpred_command.__doc__)
  sub.add_argument('-k', '--checkpoint', required=True, metavar='FILE', help="Trained checkpoint")
  sub.add_argument('-t', '--test', metavar='FILE', help="Test interaction log (CSV, dense node ids)")
  sub.add_argument('--train', metavar='FILE', help="Training interaction log, whose pairs are excluded from the negatives")
  sub.add_argument('--history', metavar='FILE', help="Interactions between training and test (validation), folded into memory before scoring")
  _add_catalog(sub, partition=False)
  sub.add_argument('-o', '--report', required=True, metavar='FILE', help="Output report (JSON)")
  sub.add_argument('--sampling', choices=('inductive', 'standard'), help="Negative sampling protocol (defaults to inductive)")
  sub.add_argument('-c', '--config', metavar='FILE', help="Configuration file (flat YAML)")
  sub.add_argument('-S', '--seed', type=int, help="Random seed")
  _add_verbose(sub)
  sub.set_defaults(func=linkpred_command) #action

  return parser


def run_command(argv=None):
  """Runs one command; returns the process exit code"""

  parser = build_parser()
  try:
    args = parser.parse_args(argv)
  except SystemExit as e:
    return e.code

  setup_logging(args.verbose)
  try:
    return args.func(args) or 0
  except (TempGraphError, ValueError, IOError) as e:
    sys.stderr.write('%s %s: error: %s\n' % (parser.prog, args.command, e))
    return 1


def main():
  """Executes the main function"""
  sys.exit(run_command())
