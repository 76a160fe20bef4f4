from ionaddress.calib.acceptance import (
    ACCEPTANCE_THRESHOLD,
    AcceptanceLoopState,
    Candidate,
    acceptance_loop,
    acceptance_rb_config,
    calibrate_library,
    measure_candidate,
)
from ionaddress.calib.drift import (
    DriftPoint,
    amplitude_error,
    drift_monitor,
    pulse_error,
    quarter_turns,
    read_drift_csv,
    write_drift_csv,
)
from ionaddress.calib.routines import (
    CalibrationRecord,
    apply_calibration,
    calibrate_all,
    calibrate_amplitude,
    calibrate_detuning,
    calibrate_zeeman_compensation,
    iter_amplitude_stages,
    transfer_lineshape,
    write_history_csv,
    zeeman_return_probability,
)
from ionaddress.calib.search import (
    CalibrationError,
    SearchResult,
    maximize_bounded,
    refine,
    scan,
    scan_then_refine,
)
