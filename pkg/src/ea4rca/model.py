"""Domain model for EA4RCA accelerator designs.

A design is a set of processing units (PUs) paired with data units (DUs).
Each PU is an ordered list of PST stages; a PST wires data-allocation
connectors (DACs) into a computation-core topology (CC) and drains it
through data-collection connectors (DCCs). A DU couples a memory-access
component (AMC), a task-processing component (TPC) and a send/receive
scheduler (SSC).

Everything here is an immutable value object. Rule checking lives in
:mod:`ea4rca.validate`; this module only provides the types plus the
resource arithmetic that the validator, generator and simulator share.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple


class XferMode(enum.Enum):
    """Transfer modes for DAC/DCC port groups."""

    DIR = "DIR"
    BDC = "BDC"
    SWH = "SWH"
    DCA = "DCA"


class AmcMode(enum.Enum):
    """Memory access patterns the AMC reader supports."""

    CSB = "CSB"
    JUB = "JUB"
    UNOD = "UNOD"


class TpcMode(enum.Enum):
    """Task-block handling policies."""

    CUP = "CUP"
    CHL = "CHL"
    THR = "THR"


class SscMode(enum.Enum):
    """Send/receive scheduling disciplines."""

    PSD = "PSD"
    SHD = "SHD"
    PHD = "PHD"
    THR = "THR"


@dataclass(frozen=True)
class PortCounts:
    stream: int = 0
    cascade: int = 0
    dma: int = 0


@dataclass(frozen=True)
class KernelSpec:
    """A compute kernel as seen by the toolkit.

    ``cycles_per_invocation`` of 0 means "derive the cost from the
    operation count and the cost model" rather than a measured figure.
    """

    name: str
    source_ref: str
    in_ports: PortCounts = PortCounts()
    out_ports: PortCounts = PortCounts()
    cycles_per_invocation: int = 0
    local_mem_bytes: int = 0


# ---------------------------------------------------------------------------
# CC topologies


@dataclass(frozen=True)
class Single:
    kernel: str


@dataclass(frozen=True)
class Cascade:
    """Linear accumulator chain of ``n`` cores running ``kernel``."""

    n: int
    kernel: str


@dataclass(frozen=True)
class Parallel:
    """``k`` non-interconnected copies of ``inner``."""

    k: int
    inner: "CcTopology"


@dataclass(frozen=True)
class Butterfly:
    """Staged exchange block with a declared core count.

    The internal layout is treated as a pipeline of ``cores`` stages;
    ``stage_kernels`` cycles over the stages when shorter than ``cores``.
    """

    cores: int
    stage_kernels: Tuple[str, ...]


CcTopology = object  # union of Single | Cascade | Parallel | Butterfly


@dataclass(frozen=True)
class CoreSite:
    """One AIE core slot inside an expanded CC.

    ``chain_id``/``chain_pos``/``chain_len`` describe the linear group the
    core belongs to (a cascade chain, a butterfly pipeline, or a singleton).
    """

    index: int
    kernel: str
    chain_id: int
    chain_pos: int
    chain_len: int
    kind: str  # "single" | "cascade" | "butterfly"


def core_count(cc: CcTopology) -> int:
    if isinstance(cc, Single):
        return 1
    if isinstance(cc, Cascade):
        return cc.n
    if isinstance(cc, Parallel):
        return cc.k * core_count(cc.inner)
    if isinstance(cc, Butterfly):
        return cc.cores
    raise TypeError(f"not a CC topology: {cc!r}")


def parallel_depth(cc: CcTopology) -> int:
    if isinstance(cc, Parallel):
        return 1 + parallel_depth(cc.inner)
    return 0


def expand_cores(cc: CcTopology) -> List[CoreSite]:
    """Enumerate cores in canonical depth-first order.

    Parallel branches are laid out consecutively, each chain head first.
    DAC/DCC served-core selectors index into this ordering.
    """

    sites: List[CoreSite] = []
    chain_counter = [0]

    def walk(node: CcTopology) -> None:
        if isinstance(node, Parallel):
            for _ in range(node.k):
                walk(node.inner)
            return
        cid = chain_counter[0]
        chain_counter[0] += 1
        if isinstance(node, Single):
            sites.append(CoreSite(len(sites), node.kernel, cid, 0, 1, "single"))
        elif isinstance(node, Cascade):
            for pos in range(node.n):
                sites.append(
                    CoreSite(len(sites), node.kernel, cid, pos, node.n, "cascade")
                )
        elif isinstance(node, Butterfly):
            for pos in range(node.cores):
                kern = node.stage_kernels[pos % len(node.stage_kernels)]
                sites.append(
                    CoreSite(len(sites), kern, cid, pos, node.cores, "butterfly")
                )
        else:
            raise TypeError(f"not a CC topology: {node!r}")

    walk(cc)
    return sites


def chain_groups(cc: CcTopology) -> List[List[CoreSite]]:
    """Cores grouped by chain, in canonical order."""

    groups: Dict[int, List[CoreSite]] = {}
    for site in expand_cores(cc):
        groups.setdefault(site.chain_id, []).append(site)
    return [groups[cid] for cid in sorted(groups)]


def external_input_cores(
    cc: CcTopology, kernels: Dict[str, KernelSpec]
) -> Dict[int, int]:
    """Map core index -> number of stream inputs it takes from outside the CC.

    Chain heads carry their kernel's declared stream inputs; interior and
    tail cores are fed through cascade or pipeline hops only.
    """

    required: Dict[int, int] = {}
    for group in chain_groups(cc):
        head = group[0]
        spec = kernels.get(head.kernel)
        n = spec.in_ports.stream if spec else 0
        if n:
            required[head.index] = n
    return required


def external_output_cores(
    cc: CcTopology, kernels: Dict[str, KernelSpec]
) -> Dict[int, int]:
    """Map core index -> number of stream outputs leaving the CC (chain tails)."""

    produced: Dict[int, int] = {}
    for group in chain_groups(cc):
        tail = group[-1]
        spec = kernels.get(tail.kernel)
        n = spec.out_ports.stream if spec else 0
        if n:
            produced[tail.index] = n
    return produced


# ---------------------------------------------------------------------------
# Served-core selectors

CoreSelector = Tuple[int, ...]


def selector_parse(text: str, n_cores: int) -> CoreSelector:
    """Parse a served-core descriptor such as ``"all"``, ``"0,4,8"`` or ``"0-15"``.

    Indices refer to the canonical depth-first core numbering.
    """

    text = text.strip()
    if text == "all":
        return tuple(range(n_cores))
    out: List[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ValueError("empty selector element")
        if "-" in part:
            lo_s, hi_s = part.split("-", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ValueError(f"descending range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if len(set(out)) != len(out):
        raise ValueError("duplicate core index in selector")
    return tuple(sorted(out))


def selector_format(serves: Sequence[int]) -> str:
    """Render a core index set in the compact range form used by config files."""

    idx = sorted(serves)
    if not idx:
        return ""
    spans: List[Tuple[int, int]] = []
    lo = hi = idx[0]
    for i in idx[1:]:
        if i == hi + 1:
            hi = i
        else:
            spans.append((lo, hi))
            lo = hi = i
    spans.append((lo, hi))
    parts = [str(a) if a == b else f"{a}-{b}" for a, b in spans]
    return ",".join(parts)


# ---------------------------------------------------------------------------
# DAC / DCC / PST / PU


@dataclass(frozen=True)
class DacSpec:
    """Data-allocation connector: feeds a subset of CC cores from outside."""

    mode: XferMode
    serves: CoreSelector
    plio_ports: int = 1
    reuse_factor: int = 1  # BDC/SWH only: cores consuming each datum
    dca_kernel: Optional[str] = None


@dataclass(frozen=True)
class DccSpec:
    """Data-collection connector: drains a subset of CC cores. BDC is not valid here."""

    mode: XferMode
    serves: CoreSelector
    plio_ports: int = 1
    reuse_factor: int = 1
    dca_kernel: Optional[str] = None


@dataclass(frozen=True)
class PstSpec:
    dacs: Tuple[DacSpec, ...]
    cc: CcTopology
    dccs: Tuple[DccSpec, ...]


@dataclass(frozen=True)
class PuSpec:
    """One processing unit: an ordered pipeline of PST stages.

    The ``per_iteration_*`` figures describe one steady-state PU iteration
    of the workload the design was shaped for (bytes in, bytes out, ops).
    """

    name: str
    psts: Tuple[PstSpec, ...]
    per_iteration_bytes_in: int = 0
    per_iteration_bytes_out: int = 0
    per_iteration_ops: int = 0


# ---------------------------------------------------------------------------
# DU side


@dataclass(frozen=True)
class AmcSpec:
    mode: AmcMode
    burst_size: int = 0  # elements per jump burst (JUB)
    element_bytes: int = 4


@dataclass(frozen=True)
class TpcSpec:
    mode: TpcMode
    tb_bytes_in: int = 0
    tb_bytes_out: int = 0
    tev_per_pu_iteration: int = 1
    chl_repeat_count: int = 0


@dataclass(frozen=True)
class SscSpec:
    sender_mode: SscMode
    receiver_mode: SscMode
    buffer_bytes: int = 0  # PHD staging only


@dataclass(frozen=True)
class DuSpec:
    """Data unit. ``amc=None`` models a DU with no DDR path (resident data)."""

    name: str
    tpc: TpcSpec
    ssc: SscSpec
    amc: Optional[AmcSpec] = None
    onchip_buffer_bytes: int = 0


@dataclass(frozen=True)
class DesignSpec:
    kernels: Dict[str, KernelSpec] = field(default_factory=dict)
    pus: Tuple[PuSpec, ...] = ()
    dus: Tuple[DuSpec, ...] = ()
    pairings: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    platform_override: Dict[str, object] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Platform


@dataclass(frozen=True)
class PlatformSpec:
    """Board capacities and rates. Defaults describe a VCK5000-class card."""

    aie_core_count: int = 400
    plio_count: int = 78  # per direction
    aie_freq_hz: float = 1.33e9
    pl_freq_hz: float = 300e6
    plio_bits_per_cycle: int = 128
    ddr_port_bits_per_cycle: int = 512
    ddr_peak_bytes_per_sec: float = 102.4e9
    aie_stream_agg_bytes_per_sec: float = 1.95e12
    aie_dma_agg_bytes_per_sec: float = 15.6e12
    core_local_mem_bytes: int = 32768
    uram_total_bytes: int = 3 * 2**20
    packet_switch_fanout_max: int = 4

    def plio_bytes_per_sec(self) -> float:
        return self.plio_bits_per_cycle / 8 * self.pl_freq_hz

    def ddr_port_bytes_per_sec(self) -> float:
        return self.ddr_port_bits_per_cycle / 8 * self.pl_freq_hz

    def with_overrides(self, overrides: Dict[str, object]) -> "PlatformSpec":
        if not overrides:
            return self
        unknown = set(overrides) - set(self.__dataclass_fields__)
        if unknown:
            raise KeyError(f"unknown platform fields: {sorted(unknown)}")
        return replace(self, **overrides)


def resolve_platform(
    design: DesignSpec, platform: Optional[PlatformSpec] = None
) -> PlatformSpec:
    base = platform if platform is not None else PlatformSpec()
    return base.with_overrides(design.platform_override)


# ---------------------------------------------------------------------------
# Resource arithmetic


def pu_core_count(pu: PuSpec) -> int:
    """AIE cores a PU occupies: CC cores plus one per DCA connector."""

    total = 0
    for pst in pu.psts:
        total += core_count(pst.cc)
        total += sum(1 for d in pst.dacs if d.mode is XferMode.DCA)
        total += sum(1 for d in pst.dccs if d.mode is XferMode.DCA)
    return total


def plio_count(pu: PuSpec) -> Tuple[int, int]:
    """(in, out) PLIO endpoints of a PU.

    Only the first PST's DACs and the last PST's DCCs touch the shell;
    interior stage boundaries are chained with internal streams.
    """

    if not pu.psts:
        return (0, 0)
    n_in = sum(d.plio_ports for d in pu.psts[0].dacs)
    n_out = sum(d.plio_ports for d in pu.psts[-1].dccs)
    return (n_in, n_out)


def pu_input_reuse(pu: PuSpec) -> float:
    """Average consumer count per input datum, weighted by PLIO ports.

    Used to convert per-iteration PU traffic into unique DDR-side bytes.
    """

    if not pu.psts:
        return 1.0
    dacs = pu.psts[0].dacs
    total_ports = sum(d.plio_ports for d in dacs)
    if total_ports == 0:
        return 1.0
    weighted = sum(d.plio_ports / d.reuse_factor for d in dacs)
    return total_ports / weighted


@dataclass(frozen=True)
class PuUsage:
    cores: int
    plio_in: int
    plio_out: int


@dataclass(frozen=True)
class DuUsage:
    buffer_bytes: int


@dataclass(frozen=True)
class ResourceReport:
    """Totals plus per-unit breakdown against a platform budget."""

    aie_cores_used: int = 0
    plio_in_used: int = 0
    plio_out_used: int = 0
    uram_bytes_used: int = 0
    aie_core_fraction: float = 0.0
    plio_in_fraction: float = 0.0
    plio_out_fraction: float = 0.0
    uram_fraction: float = 0.0
    per_pu: Dict[str, PuUsage] = field(default_factory=dict)
    per_du: Dict[str, DuUsage] = field(default_factory=dict)
    over_budget: Tuple[str, ...] = ()


def du_buffer_bytes(du: DuSpec) -> int:
    return max(du.onchip_buffer_bytes, du.tpc.tb_bytes_in + du.tpc.tb_bytes_out)


def resource_report(
    design: DesignSpec, platform: Optional[PlatformSpec] = None
) -> ResourceReport:
    plat = resolve_platform(design, platform)
    per_pu: Dict[str, PuUsage] = {}
    cores = plio_in = plio_out = 0
    for pu in design.pus:
        c = pu_core_count(pu)
        pin, pout = plio_count(pu)
        per_pu[pu.name] = PuUsage(c, pin, pout)
        cores += c
        plio_in += pin
        plio_out += pout
    per_du: Dict[str, DuUsage] = {}
    uram = 0
    for du in design.dus:
        b = du_buffer_bytes(du)
        per_du[du.name] = DuUsage(b)
        uram += b

    over: List[str] = []
    if cores > plat.aie_core_count:
        over.append("aie_cores")
    if plio_in > plat.plio_count:
        over.append("plio_in")
    if plio_out > plat.plio_count:
        over.append("plio_out")
    if uram > plat.uram_total_bytes:
        over.append("uram")

    return ResourceReport(
        aie_cores_used=cores,
        plio_in_used=plio_in,
        plio_out_used=plio_out,
        uram_bytes_used=uram,
        aie_core_fraction=cores / plat.aie_core_count,
        plio_in_fraction=plio_in / plat.plio_count,
        plio_out_fraction=plio_out / plat.plio_count,
        uram_fraction=uram / plat.uram_total_bytes,
        per_pu=per_pu,
        per_du=per_du,
        over_budget=tuple(over),
    )
