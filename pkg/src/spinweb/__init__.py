"""Entanglement networks of the 2d random transverse-field Ising model.

The pipeline: sample disorder on a periodic square lattice, reduce it to a
ground-state cluster decomposition (strong-disorder renormalization for
the fixed/box field variants, plain percolation for the diluted one), pack
circular node regions onto the lattice, link nodes that share clusters,
and measure the topology of the resulting network.
"""

from .clusters import ClusterDecomposition, cluster_size_histogram, read_decomposition, write_decomposition
from .disorder import (THETA_C, DisorderInstance, DisorderModel, Variant,
                       percolation_clusters, sample_disorder, write_instance_debug)
from .errors import ContractError, FormatError, ParameterError, VariantError
from .exact import chain_hamiltonian, three_site_effective_coupling, two_site_doublet_splitting
from .experiment import (EnsembleResult, ExperimentConfig, SampleResult, SweepResult,
                         config_from_file, config_from_text, derive_instance_seed,
                         derive_layout_seed, export_artifacts, import_edgelist,
                         run_ensemble, sweep_parameter)
from .lattice import LatticeSpec
from .network import (LinkRule, QuantumNetwork, build_network, connected_components,
                      entanglement_entropy, largest_connected_component, parse_rule,
                      read_edgelist, write_edgelist)
from .placement import (Disk, NodeLayout, hexagonal_radius, pack_hexagonal, pack_spiral,
                        read_layout, sample_radius, write_layout)
from .sdrg import RGState, decimate_bond, decimate_site, run_sdrg
from .topology import (DegreeCurve, DegreeDistribution, FitResult, TopologyReport,
                       assortativity, average_shortest_path, curve_csv,
                       degree_distribution, fit_degree_exponent, global_clustering,
                       knn_curve, local_clustering_curve, merge_degree_distributions,
                       topology_report, write_report, write_report_csv)

__version__ = "0.1.0"
