"""Figure renderer for stationary-lab CSV output files."""

from .render import PlotInputError, PlotSpec, render

__version__ = "0.1.0"
