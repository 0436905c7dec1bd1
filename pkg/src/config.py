"""Configuration module.

This module sets constants for paths: the bundled prelude and
default settings, the optional per-directory overrides and the
places where the property harness and the corpus live.
"""

import os

#***********
#*  Paths  *
#***********

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

CONFIG_DIR = os.path.join(ROOT_DIR, 'config')
CORPUS_DIR = os.path.join(ROOT_DIR, 'corpus')

PRELUDE_FILE = os.path.join(CONFIG_DIR, 'prelude.gti')
DEFAULTS_FILE = os.path.join(CONFIG_DIR, 'settings.json')
# overrides of the directory the checker is run from
SETTINGS_FILE = os.path.join(os.getcwd(), 'shapecast.json')

FAILURES_DIR = 'gg-failures'
