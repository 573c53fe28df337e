#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

from setuptools import setup, find_packages


def load_requirements(path='requirements.txt'):
  """Reads the requirements file, skipping comments and blank lines"""
  with open(path, 'rt') as f:
    lines = (k.split('#')[0].strip() for k in f)
    return [k for k in lines if k]

install_requires = load_requirements()

# Define package version
version = open("version.txt").read().rstrip()

# The only thing we do in this file is to call the setup() function with all
# parameters that define our package.
setup(

    name='bob.learn.tempgraph',
    version=version,
    description='Generative models of temporal interaction graphs',
    license='BSD',
    keywords='temporal graphs, graph generation, link prediction, point processes',
    long_description=open('README.rst').read(),

    # This line is required for any distutils based packaging.
    packages=find_packages(exclude=['examples', 'examples.*']),
    package_data={'bob.learn.tempgraph': ['data/*.csv', 'data/*.yaml']},
    include_package_data=True,
    zip_safe=False,

    install_requires = install_requires,

    extras_require = {
      'test': ['pytest'],
    },

    entry_points = {
      # scripts
      'console_scripts': [
        'tempgraph = bob.learn.tempgraph.driver:main',
      ],
    },

    classifiers = [
      'Development Status :: 4 - Beta',
      'Environment :: Console',
      'Intended Audience :: Developers',
      'Intended Audience :: Education',
      'Intended Audience :: Science/Research',
      'License :: OSI Approved :: BSD License',
      'Natural Language :: English',
      'Programming Language :: Python',
      'Programming Language :: Python :: 3',
      'Topic :: Scientific/Engineering :: Artificial Intelligence',
      ],
)
