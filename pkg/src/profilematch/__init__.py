"""Measure how well profiles on two social networks can be linked to the same person."""

from .datamodel import ATTRIBUTES, Dataset, GroundTruth, Profile, SimilarityMatrix, SimilarityVector

__all__ = ["ATTRIBUTES", "Dataset", "GroundTruth", "Profile", "SimilarityMatrix", "SimilarityVector"]
__version__ = "0.1.0"
