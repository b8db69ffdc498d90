"""Seasonal hydroclimatic time-series characterization.

Eight interpretable features of 39-year quarterly series, grouped summaries
across Köppen-Geiger climates and continental-scale station regions, and
random-forest feature-importance rankings.
"""

from .features import FEATURE_NAMES, FeatureVector, extract_features
from .series import QuarterlySeries, StandardizedSeries

__all__ = [
    "FEATURE_NAMES",
    "FeatureVector",
    "QuarterlySeries",
    "StandardizedSeries",
    "extract_features",
]

__version__ = "0.1.0"
