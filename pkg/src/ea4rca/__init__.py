"""Design toolkit for communication-avoiding accelerators on AIE arrays.

Designs pair data units (DUs) on the programmable logic with processing
units (PUs) on the AIE array. The package covers the configuration
format (.ea4rca.json), structural and resource validation, dataflow
graph generation, and a phase-based performance simulator, plus shipped
templates for the four reference applications.
"""

from .configio import (
    ConfigDocument,
    ConfigParseError,
    load_design,
    parse_design,
    save_design,
    serialize_design,
    try_parse_design,
)
from .diagnostics import Diagnostic, Severity, ValidationReport
from .graphir import (
    GraphIr,
    build_ir,
    check_ir,
    emit_graph_source,
    fuse,
    structural_signature,
)
from .model import (
    AmcMode,
    AmcSpec,
    Butterfly,
    Cascade,
    DacSpec,
    DccSpec,
    DesignSpec,
    DuSpec,
    KernelSpec,
    Parallel,
    PlatformSpec,
    PortCounts,
    PstSpec,
    PuSpec,
    ResourceReport,
    Single,
    SscMode,
    SscSpec,
    TpcMode,
    TpcSpec,
    XferMode,
    resource_report,
)
from .repo import GraphRepository, KernelRepository
from .sim import (
    AmcRequest,
    CalibrationResult,
    CostModel,
    InfeasibleMapping,
    OutOfBounds,
    PhaseTimes,
    PsdUnequalSizes,
    SimResult,
    ThrMultiplePus,
    Underdetermined,
    amc_trace,
    calibrate,
    compare_comm_methods,
    phase_times,
    simulate,
    ssc_schedule,
)
from .validate import DesignReport, validate_design, validate_structure, validate_workload
from .workloads import (
    Fft,
    Filter2d,
    Mm,
    MmT,
    TemplateParams,
    UnknownApp,
    UnsupportedMetric,
    iter_engine,
    iter_kernel,
    op_count,
    parse_size,
    subtask_count,
    template_design,
)

__version__ = "0.3.0"
