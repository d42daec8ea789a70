"""Symbolic mu-prolongations, mu-symmetries and mu-conservation laws.

Thin convenience layer over the _musym extension module. The extension lives
inside the package in wheel builds and next to it in in-tree builds.
"""

import importlib

try:
    _core = importlib.import_module("._musym", __name__)
except ImportError:  # in-tree build: the module sits on sys.path directly
    _core = importlib.import_module("_musym")

globals().update({k: v for k, v in vars(_core).items() if not k.startswith("_")})

__all__ = sorted(k for k in vars(_core) if not k.startswith("_"))
__version__ = "0.1.0"
