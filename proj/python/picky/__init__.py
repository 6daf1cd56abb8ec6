"""Trainable three-phase probabilistic chart parser."""

try:
    from ._picky import Parser, Tree, PickyError, read_treebank, __version__
except ImportError:  # in-tree builds place the extension on sys.path directly
    from _picky import Parser, Tree, PickyError, read_treebank, __version__

__all__ = ["Parser", "Tree", "PickyError", "read_treebank", "__version__"]
