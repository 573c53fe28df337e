#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""A few checks at the dataset catalog.
"""

import pytest

from .create import ingest
from .query import Database
from .test_utils import tiny_schema, tiny_stream


def _catalog(tmp_path, **kwargs):
  path = str(tmp_path / 'catalog' / 'db.sql3')
  parts = ingest(path, 'tiny', tiny_stream(), source='tiny.csv', **kwargs)
  return path, parts


def test_datasets(tmp_path):

  path, _ = _catalog(tmp_path)
  with Database(path) as db:
    assert db.dataset_names() == ['tiny']
    assert db.has_dataset('tiny')
    assert not db.has_dataset('other')
    assert db.partition_names('tiny') == ['train', 'val', 'test']
    assert db.schema('tiny') == tiny_schema()
    assert db.node_labels('tiny') == ['100', '200', '101', '201', '102', '202', '103']
    dataset = db.datasets()[0]
    assert dataset.num_nodes == 7
    assert dataset.source == 'tiny.csv'


def test_streams(tmp_path):

  path, (train, val, test) = _catalog(tmp_path)
  with Database(path) as db:
    assert db.stream('tiny') == tiny_stream()
    assert db.stream('tiny').node_labels == tiny_stream().node_labels

    assert db.stream('tiny', 'train') == train
    assert db.stream('tiny', 'val') == val
    assert db.stream('tiny', 'test') == test
    assert [len(k) for k in (train, val, test)] == [8, 2, 2]
    assert db.stream('tiny', 'val').origin_time == 4.5
    assert db.stream('tiny', 'test').origin_time == 7.0


def test_other_fractions(tmp_path):

  _, parts = _catalog(tmp_path, f_train=0.5, f_val=0.25)
  assert [len(k) for k in parts] == [6, 3, 3]


def test_recreate(tmp_path):

  path, _ = _catalog(tmp_path)
  with pytest.raises(ValueError):
    ingest(path, 'tiny', tiny_stream())

  ingest(path, 'tiny', tiny_stream(), f_train=0.5, f_val=0.25, recreate=True)
  ingest(path, 'copy', tiny_stream())
  with Database(path) as db:
    assert db.dataset_names() == ['copy', 'tiny']
    assert len(db.stream('tiny', 'train')) == 6
    assert len(db.stream('copy', 'train')) == 8


def test_invalid_queries(tmp_path):

  path, _ = _catalog(tmp_path)
  with Database(path) as db:
    with pytest.raises(ValueError):
      db.stream('nope')
    with pytest.raises(ValueError):
      db.stream('tiny', 'holdout')
    with pytest.raises(ValueError):
      db.schema('nope')

  with pytest.raises(IOError):
    Database(str(tmp_path / 'missing.sql3'))
