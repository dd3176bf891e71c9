"""Lattice laboratory: discrete GFF, sign clusters through the edge-opening
coupling, odd holonomy via double covers, and twisted determinants."""
from .clusters import ClusterState, detect_disconnection, detect_odd_cluster, open_edges
from .defects import DefectConfig, defects_from_punctures, explicit_defects, snap_to_face
from .fit import FitMode, ScalingFit, scaling_fit
from .lattice import LatticeModel, build_disk_lattice, graph_model
from .masses import exact_no_odd_probability, excursion_mass_odd, loop_mass_odd, twisted_laplacian
from .mc import (EstimatorReport, Event, GFFSampler, estimate_event, estimate_ladder, odd_cluster_statistics,
                 sample_gff, verify_topological_identity)

__all__ = [
    "ClusterState", "detect_disconnection", "detect_odd_cluster", "open_edges",
    "DefectConfig", "defects_from_punctures", "explicit_defects", "snap_to_face",
    "FitMode", "ScalingFit", "scaling_fit",
    "LatticeModel", "build_disk_lattice", "graph_model",
    "exact_no_odd_probability", "excursion_mass_odd", "loop_mass_odd", "twisted_laplacian",
    "EstimatorReport", "Event", "GFFSampler", "estimate_event", "estimate_ladder", "odd_cluster_statistics",
    "sample_gff", "verify_topological_identity",
]
