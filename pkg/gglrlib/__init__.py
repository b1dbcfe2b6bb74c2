from . import utils

__VERSION__="0.3.0"

__all__ = ['utils']
