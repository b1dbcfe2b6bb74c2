from . import configutils, imageutils
from . import graph
from . import prior
from . import restore


__all__ = ["configutils", "imageutils", "graph", "prior", "restore"]
