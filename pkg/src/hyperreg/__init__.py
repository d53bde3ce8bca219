"""Executable strong-regularity toolkit for 3-uniform hypergraphs.

Core objects (bigraphs, trigraphs, triads, decompositions), deviation
functionals with exact and factorized modes, decomposition audits,
VC₂/irreducibility analysis, corner graphs and clustering, blowup
constructions with certification, the color-grouping refinement pipeline,
and a reproducible CLI.
"""

from importlib import metadata as _metadata

from .construct import (BipartiteColoredGraph, BlowupInstance, CertReport,
                        ClassCert, MergeReport, Saturated, ack, blowup,
                        find_transversal, lower_bound_instance,
                        merge_colors_demo, natural_decomposition,
                        quasirandom_pair_partition, random_decomposition,
                        tower, tripartite_completion, wowzer)
from .core import (Bigraph, Decomposition, SimpleGraph, ThreeGraph, Triad,
                   Trigraph, arity1_neighborhood, arity2_neighborhood,
                   density_bigraph, lift, relative_density, restrict_trigraph,
                   sub_instances, triangles)
from .decomp import (DecompositionAudit, NontrivialCoverage, SliceResult,
                     TriadRef, TriadRow, audit, class_passes_dev2,
                     homogeneity_audit, materialize, nontrivial_coverage,
                     present_triads, slice_decomposition, triads_of)
from .dims import (BlowupEmbedding, Embedding, GDimCheck, QuotientResult,
                   SearchOutcome, Vc2Result, Vc2Witness, canonical,
                   find_canonical, find_induced, g_dimension_check,
                   irr_members, is_irreducible, sim_quotient, vc2,
                   vc2_at_least)
from .errors import (CapExceededError, DomainError, FormatError,
                     GenerationError, HyperregError, SizeError)
from .quasirandom import (CountingReport, Dev2Report, Dev23Report,
                          NeighborhoodReport, RegularityVerdict,
                          SubpairPrediction, SubtriadReport, UnionPrediction,
                          counting_residual, dev2, dev23, eps_regular,
                          neighborhood_stat, subpair, subtriad_deviation,
                          union_colors)
from .refine import (BadPairs, GroupedDecomposition, MergedClassCheck,
                     PairGrouping, TriadClassification, bad_pairs,
                     classify_triads, group_colors, split_colors)
from .structure import (ClusterResult, CornerFamily, CornerGraph,
                        CornerVertex, EdgeColoredBigraph, EncodingResult,
                        corner_graph, find_e0e1_copy, find_encoding,
                        haussler_cluster)

try:
    __version__ = _metadata.version("hyperreg")
except _metadata.PackageNotFoundError:  # pragma: no cover - not installed
    __version__ = "0.0.0"

__all__ = [
    "__version__",
    # errors
    "HyperregError", "DomainError", "SizeError", "GenerationError",
    "CapExceededError", "FormatError",
    # core
    "Bigraph", "SimpleGraph", "ThreeGraph", "Trigraph", "Triad",
    "Decomposition", "density_bigraph", "triangles", "relative_density",
    "restrict_trigraph", "lift", "sub_instances", "arity1_neighborhood",
    "arity2_neighborhood",
    # quasirandom
    "Dev2Report", "Dev23Report", "CountingReport", "SubtriadReport",
    "RegularityVerdict", "NeighborhoodReport", "UnionPrediction",
    "SubpairPrediction", "dev2", "dev23", "counting_residual",
    "subtriad_deviation", "eps_regular", "neighborhood_stat", "union_colors",
    "subpair",
    # decomp
    "TriadRef", "TriadRow", "DecompositionAudit", "NontrivialCoverage",
    "SliceResult", "audit", "class_passes_dev2", "triads_of", "materialize",
    "present_triads", "homogeneity_audit", "nontrivial_coverage",
    "slice_decomposition",
    # dims
    "Vc2Witness", "Vc2Result", "SearchOutcome", "QuotientResult", "Embedding",
    "BlowupEmbedding", "GDimCheck", "vc2", "vc2_at_least", "sim_quotient",
    "is_irreducible", "canonical", "find_induced", "find_canonical",
    "irr_members", "g_dimension_check",
    # structure
    "EdgeColoredBigraph", "ClusterResult", "CornerVertex", "CornerGraph",
    "CornerFamily", "EncodingResult", "find_e0e1_copy", "haussler_cluster",
    "corner_graph", "find_encoding",
    # construct
    "BipartiteColoredGraph", "BlowupInstance", "ClassCert", "CertReport",
    "MergeReport", "Saturated", "quasirandom_pair_partition", "blowup",
    "natural_decomposition", "lower_bound_instance", "merge_colors_demo",
    "find_transversal", "tripartite_completion", "random_decomposition",
    "ack", "tower", "wowzer",
    # refine
    "TriadClassification", "BadPairs", "MergedClassCheck", "PairGrouping",
    "GroupedDecomposition", "classify_triads", "bad_pairs", "group_colors",
    "split_colors",
]
