"""Multi-antenna GNSS attitude/position estimation and 3D mapping toolkit."""
from __future__ import annotations

from .attitude import (
    AttitudeSolution,
    VectorObservation,
    baseline_weights,
    davenport_matrix,
    estimate_attitude,
    solve_max_eigenpair,
)
from .core import (
    AntennaLayout,
    FrameTag,
    RotationMatrix,
    UnitQuaternion,
    Vec3,
    euler_from_quat,
    euler_to_quat,
    hexagon_layout,
    matrix_to_quat,
    quat_angle,
    quat_multiply,
    quat_to_matrix,
    rotate,
)
from .errors import (
    ConfigurationError,
    DegenerateGeometryError,
    InputError,
    InsufficientDataError,
    MgpError,
    ValidationError,
)
from .mapping import (
    GeoPoint,
    MountCalibration,
    Pose,
    ReflectorReport,
    ReflectorResult,
    ScanFrame,
    ScanPulse,
    evaluate_reflectors,
    georeference,
    georeference_stream,
    read_cloud,
    write_cloud,
)
from .multipath import (
    MultipathReport,
    MultipathVerdict,
    SatelliteAssessment,
    SnrRow,
    detect_multipath,
    snr_sd,
)
from .oracles import gain_scan, mapping_error_budget, wahba_svd
from .pipeline import (
    EpochResult,
    MetricsReport,
    MultipathConfig,
    PipelineConfig,
    RunResult,
    load_pipeline_config,
    pipeline_config_from_dict,
    process_epoch,
    run,
)
from .positioning import FixSolution, FixStatus, PositionSolution, hybrid_position
from .robust import (
    RansacParams,
    RobustAttitudeResult,
    baseline_residual,
    ransac_attitude,
)
from .simulator import (
    AttitudeProfile,
    EpochRecord,
    EpochTruth,
    FixModel,
    NoiseModel,
    Reflector,
    Satellite,
    ScannerModel,
    ScenarioConfig,
    SkyMaskSector,
    SnrModel,
    Trajectory,
    TrajectoryKind,
    corrupt_poses,
    multipath_satellite_ids,
    requery_epoch,
    scan_stream,
    simulate,
    trajectory_position,
    truth_attitude,
    truth_pose,
)
from .streams import (
    PoseRow,
    bundled_scenario_path,
    epoch_from_dict,
    epoch_to_dict,
    load_calibration,
    load_reflectors,
    load_scenario,
    poses_for_georef,
    read_epochs,
    read_poses,
    read_scan,
    scenario_from_dict,
    write_epochs,
    write_json,
    write_poses,
    write_scan,
)

__version__ = "0.1.0"
