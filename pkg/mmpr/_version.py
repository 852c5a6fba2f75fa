# pylint: disable=missing-module-docstring
__version__ = "0.3.1"
