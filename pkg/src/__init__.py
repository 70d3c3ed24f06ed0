"""
Squeezing spectra, stability and classical dynamics of a degenerate
parametric amplifier with delayed coherent feedback.
"""

from .main import AnalysisRunner

__all__ = ['AnalysisRunner']
