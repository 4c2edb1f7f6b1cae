"""Shortest paths through graphs of convex sets.

A directed graph pairs each vertex with a compact convex set and each
edge with a convex length of its endpoints' positions. The package builds
the perspective-based conic relaxation of the problem, solves it to
global optimality by branch and bound, and ships independent oracles,
dual certificates, and optimal-control front ends on top.
"""

from .bnb import BnbConfig, BnbReport, round_incumbent, solve_micp
from .conic import ConicProgram, ConicSolution, ToleranceConfig, solve
from .costs import (AffineEdgeConstraint, ConstantWithConstraint, EdgeLength,
                    Norm2Affine, QuadraticWithConstraint, SqNorm2Affine,
                    euclidean, sq_euclidean)
from .duals import (CertificateReport, PotentialCertificate, check_certificate,
                    extract_potentials, zero_certificate)
from .formulation import (FlowSolution, RelaxationProgram, TighteningOptions,
                          build_flow_lp, build_relaxation, fix_flows,
                          reconstruct, relax_bilinear)
from .geometry import (Box, ConvexSet, Ellipsoid, PolyhedronH, Product,
                       Singleton)
from .graph import Edge, Gcs, GcsError, PathResult, build, enumerate_paths
from .oracle import ExactnessReport, certify, check_extreme_exactness, solve_fixed_path

__all__ = [
    "AffineEdgeConstraint", "BnbConfig", "BnbReport", "Box",
    "CertificateReport", "ConicProgram", "ConicSolution",
    "ConstantWithConstraint", "ConvexSet", "Edge", "EdgeLength", "Ellipsoid",
    "ExactnessReport", "FlowSolution", "Gcs", "GcsError", "Norm2Affine",
    "PathResult", "PolyhedronH", "PotentialCertificate", "Product",
    "QuadraticWithConstraint", "RelaxationProgram", "Singleton",
    "SqNorm2Affine", "TighteningOptions", "ToleranceConfig", "build",
    "build_flow_lp", "build_relaxation", "certify", "check_certificate",
    "check_extreme_exactness", "enumerate_paths", "euclidean",
    "extract_potentials", "fix_flows", "reconstruct", "relax_bilinear",
    "round_incumbent", "solve", "solve_fixed_path", "solve_micp",
    "sq_euclidean", "zero_certificate",
]

__version__ = "0.1.0"
