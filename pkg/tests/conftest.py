import os
import sys

# Make helpers.py importable regardless of the pytest import mode.
sys.path.insert(0, os.path.dirname(__file__))
