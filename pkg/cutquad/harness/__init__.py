from cutquad.harness.baseline import (
    BaselineEntry,
    BaselineFile,
    ComparisonReport,
    TolerancePolicy,
    compare_to_baseline,
    load_baseline,
    record_baseline,
    save_baseline,
)
from cutquad.harness.studies import (
    ConvergenceTable,
    ShiftSeries,
    convergence_study,
    estimate_order,
    shift_study,
    tables_from_measurements,
)
from cutquad.harness.suite import (
    BenchmarkSuite,
    Measurement,
    measurements_frame,
    read_measurements_csv,
    relative_error,
    run_suite,
)
