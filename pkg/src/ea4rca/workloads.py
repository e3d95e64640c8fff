"""Application workloads, counting formulas, and shipped design templates.

The four reference applications (MM, Filter2D, FFT, MM-T) each come with a
factory that builds the full :class:`~ea4rca.model.DesignSpec` for the
published configuration, plus the iteration/operation arithmetic the
simulator and validator need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

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
    PortCounts,
    PstSpec,
    PuSpec,
    Single,
    SscMode,
    SscSpec,
    TpcMode,
    TpcSpec,
    XferMode,
)


class UnsupportedMetric(Exception):
    """Raised when a metric is undefined for a workload (e.g. FFT GOPS)."""


class UnknownApp(Exception):
    pass


# ---------------------------------------------------------------------------
# Workloads


@dataclass(frozen=True)
class Mm:
    m: int
    k: int
    n: int
    dtype: str = "float"


@dataclass(frozen=True)
class Filter2d:
    width: int
    height: int
    k: int = 5  # odd kernel side
    dtype: str = "int32"


@dataclass(frozen=True)
class Fft:
    samples: int  # power of two
    dtype: str = "cint16"


@dataclass(frozen=True)
class MmT:
    dtype: str = "float"


WorkloadSpec = object  # union of Mm | Filter2d | Fft | MmT


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def iter_kernel(m: int, k: int, n: int, tile: int = 32) -> int:
    """Kernel-granularity iteration count for an m*k*n matrix multiply."""

    return _ceil_div(m, tile) * _ceil_div(k, tile) * _ceil_div(n, tile)


def iter_engine(m: int, k: int, n: int, pu_tile: int = 128, n_pu: int = 6) -> int:
    """Engine iterations: PU-tile grid divided across ``n_pu`` units."""

    tiles = _ceil_div(m, pu_tile) * _ceil_div(k, pu_tile) * _ceil_div(n, pu_tile)
    return _ceil_div(tiles, n_pu)


MMT_TASK_OPS = 2 * 32**3  # one 32-cubed multiply per streamed task


def op_count(w: WorkloadSpec) -> int:
    if isinstance(w, Mm):
        return 2 * w.m * w.k * w.n
    if isinstance(w, Filter2d):
        return 2 * w.width * w.height * w.k * w.k
    if isinstance(w, MmT):
        return MMT_TASK_OPS
    if isinstance(w, Fft):
        raise UnsupportedMetric("operation counts are not defined for FFT runs")
    raise TypeError(f"not a workload: {w!r}")


def subtask_count(w: WorkloadSpec, pu_tile: int = 128, block_side: int = 32) -> Optional[int]:
    """Independent work units one pass over the workload exposes.

    MM-T is an unbounded stream, reported as ``None``.
    """

    if isinstance(w, Mm):
        return (
            _ceil_div(w.m, pu_tile)
            * _ceil_div(w.k, pu_tile)
            * _ceil_div(w.n, pu_tile)
        )
    if isinstance(w, Filter2d):
        return _ceil_div(w.width, block_side) * _ceil_div(w.height, block_side)
    if isinstance(w, Fft):
        return 1
    if isinstance(w, MmT):
        return None
    raise TypeError(f"not a workload: {w!r}")


def fft_transform_ops(samples: int) -> int:
    """Operation model for one transform, used for timing only."""

    return 5 * samples * int(math.log2(samples))


def fft_core_buffer_bytes(
    samples: int, pu_count: int, element_bytes: int = 4, buffer_multiplier: int = 2
) -> int:
    """Per-core working-set bytes when a transform is split over ``pu_count`` PUs."""

    return samples * element_bytes * buffer_multiplier // pu_count


DTYPE_BYTES = {"float": 4, "int32": 4, "cint16": 4, "int16": 2, "int8": 1}


@dataclass(frozen=True)
class TaskProfile:
    """Per-subtask traffic and work for one PU."""

    bytes_in: int
    bytes_out: int
    ops: int
    dtype: str


def task_profile(w: WorkloadSpec, params: "TemplateParams" = None) -> TaskProfile:
    p = params or TemplateParams()
    if isinstance(w, Mm):
        eb = DTYPE_BYTES[w.dtype]
        t = p.pu_tile
        return TaskProfile(2 * t * t * eb, t * t * eb, 2 * t**3, w.dtype)
    if isinstance(w, Filter2d):
        eb = DTYPE_BYTES[w.dtype]
        b = p.block_side
        halo = (b + w.k - 1) ** 2  # border rows/cols resent with each block
        return TaskProfile(halo * eb, b * b * eb, 2 * b * b * w.k * w.k, w.dtype)
    if isinstance(w, Fft):
        eb = DTYPE_BYTES[w.dtype]
        return TaskProfile(w.samples * eb, w.samples * eb, fft_transform_ops(w.samples), w.dtype)
    if isinstance(w, MmT):
        return TaskProfile(0, 0, MMT_TASK_OPS, w.dtype)
    raise TypeError(f"not a workload: {w!r}")


# ---------------------------------------------------------------------------
# Templates


@dataclass(frozen=True)
class TemplateParams:
    pu_count: Optional[int] = None  # None: application default
    du_count: Optional[int] = None  # None: derived from the app's DU:PU ratio
    kernel_tile: int = 32
    pu_tile: int = 128
    block_side: int = 32
    butterfly_cores: int = 4
    buffer_multiplier: int = 2


APP_DEFAULT_PUS = {"mm": 6, "filter2d": 44, "fft": 8, "mmt": 50}


def _mm_kernels() -> Dict[str, KernelSpec]:
    return {
        "mm32": KernelSpec(
            name="mm32",
            source_ref="kernels/mm32.cc",
            in_ports=PortCounts(stream=2, cascade=1),
            out_ports=PortCounts(stream=1, cascade=1),
            local_mem_bytes=24576,
        )
    }


def _mm_pu(name: str) -> PuSpec:
    # 16 cascades of 4 in a 4x4 output-block grid; chain g=4i+j has head core 4g.
    mat_a = [
        DacSpec(XferMode.BDC, tuple(16 * i + 4 * j for j in range(4)), reuse_factor=4)
        for i in range(4)
    ]
    mat_b = [
        DacSpec(XferMode.BDC, tuple(16 * i + 4 * j for i in range(4)), reuse_factor=4)
        for j in range(4)
    ]
    dccs = [
        DccSpec(XferMode.SWH, tuple(16 * p + 4 * q + 3 for q in range(4)))
        for p in range(4)
    ]
    pst = PstSpec(
        dacs=tuple(mat_a + mat_b),
        cc=Parallel(16, Cascade(4, "mm32")),
        dccs=tuple(dccs),
    )
    return PuSpec(
        name=name,
        psts=(pst,),
        per_iteration_bytes_in=2 * 128 * 128 * 4,
        per_iteration_bytes_out=128 * 128 * 4,
        per_iteration_ops=2 * 128**3,
    )


def _mm_template(pu_count: int, du_count: int) -> DesignSpec:
    pus = tuple(_mm_pu(f"pu{i}") for i in range(pu_count))
    mat_bytes = 128 * 128 * 4
    du = DuSpec(
        name="du0",
        amc=AmcSpec(AmcMode.JUB, burst_size=128 * 128, element_bytes=4),
        tpc=TpcSpec(
            TpcMode.CUP,
            tb_bytes_in=27 * mat_bytes,
            tb_bytes_out=6 * mat_bytes,
            tev_per_pu_iteration=3,
        ),
        ssc=SscSpec(SscMode.PHD, SscMode.PHD, buffer_bytes=12 * mat_bytes),
        onchip_buffer_bytes=33 * mat_bytes,
    )
    return DesignSpec(
        kernels=_mm_kernels(),
        pus=pus,
        dus=(du,),
        pairings={"du0": tuple(pu.name for pu in pus)},
    )


def _filter2d_template(pu_count: int, du_count: int, params: TemplateParams) -> DesignSpec:
    k = 5
    b = params.block_side
    eb = 4
    kernels = {
        "filter2d": KernelSpec(
            name="filter2d",
            source_ref="kernels/filter2d.cc",
            in_ports=PortCounts(stream=1),
            out_ports=PortCounts(stream=1),
            local_mem_bytes=((b + k - 1) ** 2 + b * b) * eb * 2,
        )
    }
    blocks_per_pu = 8
    pus = []
    for i in range(pu_count):
        pst = PstSpec(
            dacs=(DacSpec(XferMode.SWH, tuple(range(blocks_per_pu))),),
            cc=Parallel(blocks_per_pu, Single("filter2d")),
            dccs=(DccSpec(XferMode.SWH, tuple(range(blocks_per_pu))),),
        )
        pus.append(
            PuSpec(
                name=f"pu{i}",
                psts=(pst,),
                per_iteration_bytes_in=blocks_per_pu * (b + k - 1) ** 2 * eb,
                per_iteration_bytes_out=blocks_per_pu * b * b * eb,
                per_iteration_ops=blocks_per_pu * 2 * b * b * k * k,
            )
        )
    dus = []
    pairings: Dict[str, Tuple[str, ...]] = {}
    per_du = _ceil_div(pu_count, du_count)
    for d in range(du_count):
        served = [p.name for p in pus[d * per_du : (d + 1) * per_du]]
        if not served:
            break
        tb = len(served) * blocks_per_pu * b * b * eb
        fill = len(served) * blocks_per_pu * (b + k - 1) ** 2 * eb
        du = DuSpec(
            name=f"du{d}",
            amc=AmcSpec(AmcMode.JUB, burst_size=b * b, element_bytes=eb),
            tpc=TpcSpec(
                TpcMode.CUP,
                tb_bytes_in=tb,
                tb_bytes_out=tb,
                tev_per_pu_iteration=blocks_per_pu,
            ),
            ssc=SscSpec(SscMode.PHD, SscMode.PHD, buffer_bytes=fill),
            onchip_buffer_bytes=2 * tb,
        )
        dus.append(du)
        pairings[du.name] = tuple(served)
    return DesignSpec(kernels=kernels, pus=tuple(pus), dus=tuple(dus), pairings=pairings)


def _fft_template(pu_count: int, du_count: int, params: TemplateParams) -> DesignSpec:
    samples = 4096  # reference shape; the simulator rescales from the workload
    eb = 4
    kernels = {
        "fft_butterfly_stage": KernelSpec(
            name="fft_butterfly_stage",
            source_ref="kernels/fft_butterfly.cc",
            in_ports=PortCounts(stream=1),
            out_ports=PortCounts(stream=2),
            local_mem_bytes=16384,
        ),
        "fft_cascade_stage": KernelSpec(
            name="fft_cascade_stage",
            source_ref="kernels/fft_cascade.cc",
            in_ports=PortCounts(stream=1, cascade=1),
            out_ports=PortCounts(stream=1, cascade=1),
            local_mem_bytes=16384,
        ),
    }
    bf = params.butterfly_cores
    pus = []
    for i in range(pu_count):
        pst1 = PstSpec(
            dacs=(DacSpec(XferMode.BDC, (0,)),),
            cc=Butterfly(bf, ("fft_butterfly_stage",)),
            dccs=(
                DccSpec(XferMode.DIR, (bf - 1,)),
                DccSpec(XferMode.DIR, (bf - 1,)),
            ),
        )
        pst2 = PstSpec(
            dacs=(DacSpec(XferMode.DIR, (0,)), DacSpec(XferMode.DIR, (3,))),
            cc=Parallel(2, Cascade(3, "fft_cascade_stage")),
            dccs=(DccSpec(XferMode.DIR, (2,)), DccSpec(XferMode.DIR, (5,))),
        )
        pus.append(
            PuSpec(
                name=f"pu{i}",
                psts=(pst1, pst2),
                per_iteration_bytes_in=samples * eb,
                per_iteration_bytes_out=samples * eb,
                per_iteration_ops=fft_transform_ops(samples),
            )
        )
    dus = []
    pairings: Dict[str, Tuple[str, ...]] = {}
    for d in range(du_count):
        du = DuSpec(
            name=f"du{d}",
            amc=AmcSpec(AmcMode.CSB, element_bytes=eb),
            tpc=TpcSpec(
                TpcMode.CUP,
                tb_bytes_in=samples * eb,
                tb_bytes_out=samples * eb,
            ),
            ssc=SscSpec(SscMode.PHD, SscMode.PHD, buffer_bytes=samples * eb),
            onchip_buffer_bytes=2 * samples * eb,
        )
        dus.append(du)
        pairings[du.name] = (f"pu{d}",)
    return DesignSpec(kernels=kernels, pus=tuple(pus), dus=tuple(dus), pairings=pairings)


def _mmt_template(pu_count: int, du_count: int) -> DesignSpec:
    kernels = {
        "mm32_cascade": KernelSpec(
            name="mm32_cascade",
            source_ref="kernels/mm32_cascade.cc",
            in_ports=PortCounts(stream=1, cascade=1),
            out_ports=PortCounts(stream=1, cascade=1),
            local_mem_bytes=16384,
        )
    }
    task_bytes = 3 * 32 * 32 * 4
    pus = []
    for i in range(pu_count):
        pst = PstSpec(
            dacs=(DacSpec(XferMode.DIR, (0,)),),
            cc=Cascade(8, "mm32_cascade"),
            dccs=(DccSpec(XferMode.DIR, (7,)),),
        )
        pus.append(
            PuSpec(
                name=f"pu{i}",
                psts=(pst,),
                per_iteration_bytes_in=0,  # task block stays resident; pure compute
                per_iteration_bytes_out=0,
                per_iteration_ops=MMT_TASK_OPS,
            )
        )
    dus = []
    pairings: Dict[str, Tuple[str, ...]] = {}
    for d in range(du_count):
        du = DuSpec(
            name=f"du{d}",
            amc=None,
            tpc=TpcSpec(
                TpcMode.CHL,
                tb_bytes_in=task_bytes,
                tb_bytes_out=0,
                chl_repeat_count=1_000_000,
            ),
            ssc=SscSpec(SscMode.THR, SscMode.THR),
            onchip_buffer_bytes=task_bytes,
        )
        dus.append(du)
        pairings[du.name] = (f"pu{d}",)
    return DesignSpec(kernels=kernels, pus=tuple(pus), dus=tuple(dus), pairings=pairings)


def template_design(app: str, params: Optional[TemplateParams] = None) -> DesignSpec:
    """Build the published design for one of the reference applications.

    ``app`` is case-insensitive; "mm-t" and "mmt" both name the MM
    throughput-test engine.
    """

    p = params or TemplateParams()
    key = app.lower().replace("-", "").replace("_", "")
    if key not in APP_DEFAULT_PUS:
        raise UnknownApp(f"unknown application template: {app!r}")
    n_pu = p.pu_count if p.pu_count is not None else APP_DEFAULT_PUS[key]
    if n_pu < 1:
        raise ValueError("pu_count must be >= 1")
    if key == "mm":
        n_du = p.du_count if p.du_count is not None else 1
        return _mm_template(n_pu, n_du)
    if key == "filter2d":
        n_du = p.du_count if p.du_count is not None else _ceil_div(n_pu, 4)
        return _filter2d_template(n_pu, n_du, p)
    if key == "fft":
        n_du = p.du_count if p.du_count is not None else n_pu
        return _fft_template(n_pu, n_du, p)
    n_du = p.du_count if p.du_count is not None else n_pu
    return _mmt_template(n_pu, n_du)


def parse_size(app: str, text: str) -> WorkloadSpec:
    """Parse the CLI size grammar: MM "MxKxN", Filter2D "WxH:k", FFT "N"."""

    key = app.lower().replace("-", "").replace("_", "")
    if key == "mm":
        parts = text.lower().split("x")
        if len(parts) != 3:
            raise ValueError(f"expected MxKxN, got {text!r}")
        m, k, n = (int(v) for v in parts)
        return Mm(m, k, n)
    if key == "filter2d":
        dims, _, kside = text.partition(":")
        parts = dims.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"expected WxH or WxH:k, got {text!r}")
        w, h = (int(v) for v in parts)
        return Filter2d(w, h, int(kside) if kside else 5)
    if key == "fft":
        return Fft(int(text))
    if key == "mmt":
        return MmT()
    raise UnknownApp(f"unknown application: {app!r}")
