"""Local graph clustering via capacity releasing diffusion.

Functional core:
    graph        -- immutable CSR graphs, generators, conductance, sweep cuts
    crd          -- the capacity releasing diffusion (inner step + outer loop)
    acl          -- approximate personalized PageRank baseline with sweep cuts
    evaluation   -- metrics, brute-force oracles, spectral gap, truth filtering
    experiments  -- benchmark protocols and CSV emission
    cli          -- command-line front door

Estimator layer:
    CapacityReleasingDiffusion and ACLClustering wrap the core with a
    scikit-learn style fit / fit_predict / get_params API.
"""

from .estimators import ACLClustering, CapacityReleasingDiffusion
from .graph import Graph, CutResult, load_edge_list

__all__ = [
    "ACLClustering",
    "CapacityReleasingDiffusion",
    "CutResult",
    "Graph",
    "load_edge_list",
]

__version__ = "0.1.0"
