#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Figures comparing real and synthetic edge features"""

import os
import logging

import numpy
import matplotlib
matplotlib.use('Agg')
from matplotlib import pyplot

from .evaluation import feature_histograms, js_distance, shared_ranges, EvaluationConfig
from .utils import ensure_dir

logger = logging.getLogger(__name__)


def feature_histogram_figure(name, real, synth):
  """Overlays the normalized 1D histograms of one feature"""

  edges = real.edges[0]
  centers = 0.5 * (edges[:-1] + edges[1:])
  widths = numpy.diff(edges)
  figure, axis = pyplot.subplots(figsize=(5, 3.5), constrained_layout=True)
  axis.bar(centers, real.pmf(), width=widths, alpha=0.5, label='real')
  axis.bar(centers, synth.pmf(), width=widths, alpha=0.5, label='synthetic')
  axis.set_title('%s (JS distance %.3f)' % (name, js_distance(real, synth)))
  axis.set_xlabel(name)
  axis.set_ylabel('probability')
  axis.legend()
  return figure


def pair_distance_heatmap(names, distances):
  """Matrix of the JS distances between the joint histograms of feature
  pairs; ``distances`` is keyed by ``(name, name)``"""

  size = len(names)
  matrix = numpy.full((size, size), numpy.nan)
  index = dict((n, i) for i, n in enumerate(names))
  for (a, b), value in distances.items():
    matrix[index[a], index[b]] = matrix[index[b], index[a]] = value

  figure, axis = pyplot.subplots(figsize=(1.2 * size + 3, 1.2 * size + 2), constrained_layout=True)
  image = axis.imshow(matrix, vmin=0, vmax=1, cmap='viridis')
  axis.set_xticks(range(size))
  axis.set_yticks(range(size))
  axis.set_xticklabels(names, rotation=45, ha='right')
  axis.set_yticklabels(names)
  for i in range(size):
    for j in range(size):
      if not numpy.isnan(matrix[i, j]):
        axis.text(j, i, '%.2f' % matrix[i, j], ha='center', va='center', color='w')
  figure.colorbar(image, ax=axis, label='JS distance')
  return figure


def write_plots(real, synth, directory, config=None):
  """Writes one histogram per feature and, with two features or more, the
  pair heat map into ``directory``.

  Returns: the list of written files
  """

  config = config or EvaluationConfig()
  ensure_dir(directory)
  written = []
  if not real.schema.n:
    return written

  ranges = shared_ranges(real, synth)
  real_single, real_pairs = feature_histograms(real, config.n_bins_1d, ranges, config.n_bins_2d)
  synth_single, synth_pairs = feature_histograms(synth, config.n_bins_1d, ranges, config.n_bins_2d)

  for name in real.schema.names:
    path = os.path.join(directory, 'feature_%s.png' % name)
    figure = feature_histogram_figure(name, real_single[name], synth_single[name])
    figure.savefig(path, dpi=100)
    pyplot.close(figure)
    written.append(path)

  if real_pairs:
    distances = dict((key, js_distance(h, synth_pairs[key])) for key, h in real_pairs.items())
    path = os.path.join(directory, 'feature_pairs.png')
    figure = pair_distance_heatmap(real.schema.names, distances)
    figure.savefig(path, dpi=100)
    pyplot.close(figure)
    written.append(path)

  logger.info("Wrote %d figures to '%s'", len(written), directory)
  return written
