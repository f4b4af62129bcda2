"""Coverage simulation and placement optimization for UAV-mounted base stations.

Modules:
    scenario      world model (area, users, anchors, radio parameters,
                  system disciplines) and scenario file I/O
    pointprocess  clustered user populations and the cell-area clustering metric
    channel       air-to-ground propagation, coverage radius, optimal altitude
    placement     exact and tether-constrained max-coverage placement solvers
    mission       discrete-time battery/tether mission simulation
    experiments   seeded Monte-Carlo presets producing CSV result tables
"""

from .channel import CoverageDisk, UavPosition, coverage_radius, \
    free_space_path_loss_db, is_covered, mean_path_loss, optimal_altitude, \
    prob_los
from .experiments import ExperimentConfig, ResultRow, ResultTable, \
    default_config, derive_seed, read_results, run_experiment, write_results
from .mission import Activity, MissionParams, MissionTrace, MobilityParams, \
    Summary, TraceStep, UavState, read_trace, run_mission, step_mobility, \
    summarize, write_trace
from .placement import HoverRegion, Placement, grid_max_cover, \
    grid_tethered_count, max_cover_disk, max_cover_disk_constrained, \
    place_free, place_itethered, place_multi, place_tethered
from .pointprocess import CalibrationError, CovEstimate, ThomasParams, \
    calibrate_cov, estimate_cov, ppp_baseline, sample_thomas
from .scenario import Anchor, Area, ChannelParams, Ituav, LinkBudget, \
    MultiItuav, MultiTuav, ParseError, Scenario, SystemKind, Tuav, Ue, \
    UavNoSwap, UavSwap, ValidationError, load_scenario, parse_system, \
    sample_anchors, sample_uniform_ues, save_scenario, scenario_from_dict, \
    scenario_from_yaml, scenario_to_dict, system_label

__version__ = "0.1.0"
