"""Network comparison from graphlet orbit distributions, with PCA/ICA denoising."""

from .atlas import GraphletAtlas, build_atlas
from .counting import EmpiricalDistribution, GraphletDegreeMatrix, brute_force_count, count_orbits, orbit_histogram
from .denoise import ReconstructedGDM, ica_reconstruct, pca_reconstruct, truncate_reconstruction
from .distances import DistanceMatrix, gcd, gda, netemd, pairwise_matrix, prepare, weighted_netemd
from .emd import emd, emd_star
from .errors import CalibrationError, CapabilityError, DomainError, NetEmdError, ParseError, UsageError
from .evaluation import LabeledDataset, ari, aupr, p_bar, task1_report
from .generators import ModelSpec, calibrate, generate, inject_reciprocity
from .graph import Graph, density, load_edge_list, reciprocity

__version__ = "0.1.0"

__all__ = [
    "Graph", "load_edge_list", "density", "reciprocity",
    "GraphletAtlas", "build_atlas",
    "GraphletDegreeMatrix", "EmpiricalDistribution", "count_orbits", "brute_force_count", "orbit_histogram",
    "emd", "emd_star",
    "ReconstructedGDM", "pca_reconstruct", "ica_reconstruct", "truncate_reconstruction",
    "DistanceMatrix", "netemd", "weighted_netemd", "gda", "gcd", "pairwise_matrix", "prepare",
    "ModelSpec", "generate", "calibrate", "inject_reciprocity",
    "LabeledDataset", "p_bar", "aupr", "ari", "task1_report",
    "NetEmdError", "ParseError", "DomainError", "CalibrationError", "CapabilityError", "UsageError",
]
