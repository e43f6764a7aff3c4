"""Python bindings for the dtwin wireless digital-twin simulator."""

from ._core import (
    ArrayConfig,
    DtwinError,
    FingerprintDB,
    Localizer,
    OfdmParams,
    PathSet,
    PropagationPath,
    Scenario,
    Scene,
    build_database,
    compute_mdp,
    diff_drive_step,
    half_wavelength_array,
    load_scenario,
    load_scene,
    load_scene_file,
    mdp_distance,
    mrt_beamformer,
    read_fingerprint_db,
    run_simulation,
    summarize_trace,
    synthesize_channel,
    trace_paths,
    validate_scenario,
    write_fingerprint_db,
    achievable_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
