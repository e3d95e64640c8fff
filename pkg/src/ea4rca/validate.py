"""Design rule checking.

``validate_structure`` covers composition rules (connector modes, port
coverage, chaining, pairings, selectors). ``validate_resources`` checks
the design against platform budgets. ``validate_design`` runs both and
answers deployability. ``validate_workload`` adds checks that depend on
the problem size, such as the FFT per-core working set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .diagnostics import Diagnostic, DiagnosticCollector, ValidationReport
from .model import (
    Butterfly,
    Cascade,
    CcTopology,
    DesignSpec,
    Parallel,
    PlatformSpec,
    ResourceReport,
    Single,
    XferMode,
    core_count,
    external_input_cores,
    external_output_cores,
    parallel_depth,
    resolve_platform,
    resource_report,
)
from .workloads import Fft, WorkloadSpec, fft_core_buffer_bytes

MAX_PARALLEL_NESTING = 2

_OVER_CODES = {
    "aie_cores": "OVER_AIE_CORES",
    "plio_in": "OVER_PLIO_IN",
    "plio_out": "OVER_PLIO_OUT",
    "uram": "OVER_URAM",
}


@dataclass(frozen=True)
class DesignReport:
    """Validation outcome plus the resource accounting it was judged against."""

    diagnostics: Tuple[Diagnostic, ...]
    resource: ResourceReport
    platform: PlatformSpec = PlatformSpec()

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def errors(self) -> Tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity.value == "error")

    @property
    def is_deployable(self) -> bool:
        return self.ok and not self.resource.over_budget

    def render(self) -> str:
        lines = [d.render() for d in self.diagnostics]
        lines.append(
            f"deployable: {self.resource.aie_cores_used}/{self.platform.aie_core_count} cores, "
            f"{self.resource.plio_in_used}/{self.platform.plio_count} plio in, "
            f"{self.resource.plio_out_used}/{self.platform.plio_count} plio out"
            if self.is_deployable
            else "not deployable"
        )
        return "\n".join(lines)


def _cc_expandable(cc: CcTopology) -> bool:
    """True when expand_cores can enumerate the CC (stage lists are usable)."""

    if isinstance(cc, Parallel):
        return _cc_expandable(cc.inner)
    if isinstance(cc, Butterfly):
        return bool(cc.stage_kernels)
    return True


def _check_cc(diags: DiagnosticCollector, design: DesignSpec, cc: CcTopology, path: str) -> None:
    if parallel_depth(cc) > MAX_PARALLEL_NESTING:
        diags.error(
            "CC_NESTING", path,
            f"Parallel nesting depth {parallel_depth(cc)} exceeds {MAX_PARALLEL_NESTING}",
        )

    def leaf_kernels(node: CcTopology):
        if isinstance(node, (Single, Cascade)):
            yield node.kernel
        elif isinstance(node, Parallel):
            yield from leaf_kernels(node.inner)
        elif isinstance(node, Butterfly):
            yield from node.stage_kernels

    for kname in dict.fromkeys(leaf_kernels(cc)):
        if kname not in design.kernels:
            diags.error("KERNEL_UNKNOWN", path, f"kernel {kname!r} is not declared")

    def walk(node: CcTopology) -> None:
        if isinstance(node, Parallel):
            if node.k < 2:
                diags.error("CC_ARITY", path, f"Parallel<{node.k}> needs k >= 2")
            walk(node.inner)
        elif isinstance(node, Cascade):
            if node.n < 2:
                diags.error("CC_ARITY", path, f"Cascade<{node.n}> needs n >= 2")
            spec = design.kernels.get(node.kernel)
            if spec and (spec.in_ports.cascade < 1 or spec.out_ports.cascade < 1):
                diags.error(
                    "CASCADE_PORTS", path,
                    f"kernel {node.kernel!r} lacks cascade ports for a linear chain",
                )
        elif isinstance(node, Butterfly):
            if node.cores < 2:
                diags.error("CC_ARITY", path, f"Butterfly<{node.cores}> needs cores >= 2")
            if not node.stage_kernels:
                diags.error("CC_ARITY", path, "Butterfly declares no stage kernels")
            elif len(node.stage_kernels) > node.cores:
                diags.error(
                    "CC_ARITY", path,
                    f"Butterfly has {len(node.stage_kernels)} stage kernels for {node.cores} cores",
                )
            for kname in dict.fromkeys(node.stage_kernels):
                spec = design.kernels.get(kname)
                if spec and (spec.in_ports.stream < 1 or spec.out_ports.stream < 1):
                    diags.error(
                        "CASCADE_PORTS", path,
                        f"stage kernel {kname!r} lacks stream ports for pipeline hops",
                    )

    walk(cc)


def _check_connector(
    diags: DiagnosticCollector, design: DesignSpec, conn, path: str, n_cores: int, is_dcc: bool
) -> None:
    if is_dcc and conn.mode is XferMode.BDC:
        diags.error("BDC_ON_DCC", f"{path}.mode", "broadcast is a DAC-only mode")
    if conn.mode is XferMode.DIR and len(conn.serves) != 1:
        diags.error(
            "DIR_MULTI_CORE", f"{path}.serves",
            f"DIR must serve exactly one core, got {len(conn.serves)}",
        )
    bad = [i for i in conn.serves if i < 0 or i >= n_cores]
    if bad:
        diags.error(
            "SELECTOR_RANGE", f"{path}.serves",
            f"core indices {bad} outside 0..{n_cores - 1}",
        )
    if conn.reuse_factor < 1:
        diags.error("REUSE_FACTOR_MODE", f"{path}.reuse_factor", "reuse_factor must be >= 1")
    elif conn.reuse_factor > 1 and conn.mode not in (XferMode.BDC, XferMode.SWH):
        diags.error(
            "REUSE_FACTOR_MODE", f"{path}.reuse_factor",
            f"reuse_factor > 1 requires BDC or SWH, not {conn.mode.value}",
        )
    if conn.plio_ports < 1:
        diags.error("PST_CHAIN_ARITY", f"{path}.plio_ports", "plio_ports must be >= 1")
    if conn.mode is XferMode.DCA:
        if conn.dca_kernel is None:
            diags.error("DCA_KERNEL_MISSING", path, "DCA connector names no kernel")
        elif conn.dca_kernel not in design.kernels:
            diags.error(
                "DCA_KERNEL_MISSING", path,
                f"DCA kernel {conn.dca_kernel!r} is not declared",
            )
    elif conn.dca_kernel is not None:
        diags.error(
            "DCA_KERNEL_PRESENT", path,
            f"{conn.mode.value} connector must not name a DCA kernel",
        )


def _check_coverage(
    diags: DiagnosticCollector,
    required: Dict[int, int],
    connectors,
    path: str,
    code: str,
    side: str,
) -> None:
    provided: Dict[int, int] = {}
    for conn in connectors:
        for core in conn.serves:
            provided[core] = provided.get(core, 0) + 1
    for core in sorted(set(required) | set(provided)):
        want = required.get(core, 0)
        have = provided.get(core, 0)
        if want != have:
            diags.error(
                code, path,
                f"core {core} has {have} {side} feed(s), needs {want}",
            )


def validate_structure(
    design: DesignSpec, platform: Optional[PlatformSpec] = None
) -> ValidationReport:
    """Check every composition rule; returns one diagnostic per violation."""

    plat = resolve_platform(design, platform)
    diags = DiagnosticCollector()

    for kname in sorted(design.kernels):
        k = design.kernels[kname]
        if k.local_mem_bytes > plat.core_local_mem_bytes:
            diags.error(
                "KERNEL_MEM_EXCEEDED", f"kernels.{kname}.local_mem_bytes",
                f"{k.local_mem_bytes} bytes exceed core memory of {plat.core_local_mem_bytes}",
            )

    seen_pu: Dict[str, int] = {}
    for i, pu in enumerate(design.pus):
        if pu.name in seen_pu:
            diags.error(
                "DUP_NAME", f"pus[{i}].name",
                f"PU name {pu.name!r} already used at pus[{seen_pu[pu.name]}]",
            )
        seen_pu.setdefault(pu.name, i)

        if not pu.psts:
            diags.error("PST_CHAIN_ARITY", f"pus[{i}].psts", "PU declares no PST stages")
            continue

        for j, pst in enumerate(pu.psts):
            ppath = f"pus[{i}].psts[{j}]"
            _check_cc(diags, design, pst.cc, f"{ppath}.cc")
            n = core_count(pst.cc)
            for a, dac in enumerate(pst.dacs):
                _check_connector(diags, design, dac, f"{ppath}.dacs[{a}]", n, is_dcc=False)
            for a, dcc in enumerate(pst.dccs):
                _check_connector(diags, design, dcc, f"{ppath}.dccs[{a}]", n, is_dcc=True)
            if not _cc_expandable(pst.cc):
                continue  # already reported; core enumeration is undefined
            _check_coverage(
                diags, external_input_cores(pst.cc, design.kernels), pst.dacs,
                f"{ppath}.dacs", "DAC_COVERAGE", "input",
            )
            _check_coverage(
                diags, external_output_cores(pst.cc, design.kernels), pst.dccs,
                f"{ppath}.dccs", "DCC_COVERAGE", "output",
            )

        for j in range(len(pu.psts) - 1):
            up = pu.psts[j]
            down = pu.psts[j + 1]
            out_ports = sum(d.plio_ports for d in up.dccs)
            in_ports = sum(d.plio_ports for d in down.dacs)
            if out_ports != in_ports:
                diags.error(
                    "PST_CHAIN_ARITY", f"pus[{i}].psts[{j + 1}]",
                    f"stage boundary carries {out_ports} ports in, {in_ports} ports out",
                )
            for a, conn in enumerate(up.dccs):
                if conn.mode not in (XferMode.DIR, XferMode.DCA):
                    diags.error(
                        "PST_CHAIN_MODE", f"pus[{i}].psts[{j}].dccs[{a}].mode",
                        f"{conn.mode.value} cannot feed a following stage; use DIR or DCA",
                    )
            for a, conn in enumerate(down.dacs):
                if conn.mode not in (XferMode.DIR, XferMode.DCA):
                    diags.error(
                        "PST_CHAIN_MODE", f"pus[{i}].psts[{j + 1}].dacs[{a}].mode",
                        f"{conn.mode.value} cannot read from a preceding stage; use DIR or DCA",
                    )

    seen_du: Dict[str, int] = {}
    for i, du in enumerate(design.dus):
        if du.name in seen_du:
            diags.error(
                "DUP_NAME", f"dus[{i}].name",
                f"DU name {du.name!r} already used at dus[{seen_du[du.name]}]",
            )
        seen_du.setdefault(du.name, i)

        if du.ssc.receiver_mode.value == "PSD":
            diags.error(
                "SSC_PSD_RECEIVER", f"dus[{i}].ssc.receiver_mode",
                "parallel send is a sender-only discipline",
            )
        if du.tpc.mode.value == "THR":
            if du.tpc.tb_bytes_in or du.tpc.tb_bytes_out or du.onchip_buffer_bytes:
                diags.error(
                    "TPC_THR_BUFFER", f"dus[{i}].tpc",
                    "through mode streams directly; task-block and buffer sizes must be 0",
                )

    pu_names = {pu.name for pu in design.pus}
    du_names = {du.name for du in design.dus}
    pu_owner: Dict[str, str] = {}
    for du_name in sorted(design.pairings):
        served = design.pairings[du_name]
        if du_name not in du_names:
            diags.error(
                "PAIRING_UNKNOWN_DU", f"pairings.{du_name}",
                f"{du_name!r} is not a declared DU",
            )
        for p in served:
            if p not in pu_names:
                diags.error(
                    "PAIRING_UNKNOWN_PU", f"pairings.{du_name}",
                    f"{p!r} is not a declared PU",
                )
            elif p in pu_owner:
                diags.error(
                    "PAIRING_DUP", f"pairings.{du_name}",
                    f"PU {p!r} is already served by {pu_owner[p]!r}",
                )
            else:
                pu_owner[p] = du_name
    for pu in design.pus:
        if pu.name not in pu_owner:
            diags.error(
                "PAIRING_UNSERVED", f"pairings",
                f"PU {pu.name!r} is not served by any DU",
            )
    for i, du in enumerate(design.dus):
        served = design.pairings.get(du.name, ())
        if du.ssc.sender_mode.value == "THR" or du.ssc.receiver_mode.value == "THR":
            if len(served) > 1:
                diags.error(
                    "THR_FANOUT", f"pairings.{du.name}",
                    f"through scheduling serves one PU, got {len(served)}",
                )

    return diags.report()


def validate_resources(
    design: DesignSpec, platform: Optional[PlatformSpec] = None
) -> DesignReport:
    """Check platform budgets; over-budget findings do not abort anything."""

    plat = resolve_platform(design, platform)
    rep = resource_report(design, plat)
    diags = DiagnosticCollector()
    budgets = {
        "aie_cores": (rep.aie_cores_used, plat.aie_core_count),
        "plio_in": (rep.plio_in_used, plat.plio_count),
        "plio_out": (rep.plio_out_used, plat.plio_count),
        "uram": (rep.uram_bytes_used, plat.uram_total_bytes),
    }
    for key in rep.over_budget:
        used, cap = budgets[key]
        diags.error(_OVER_CODES[key], "$", f"{key} usage {used} exceeds budget {cap}")
    return DesignReport(diags.report().diagnostics, rep, plat)


def validate_design(
    design: DesignSpec, platform: Optional[PlatformSpec] = None
) -> DesignReport:
    """Structure rules plus resource budgets in one report."""

    structure = validate_structure(design, platform)
    resources = validate_resources(design, platform)
    return DesignReport(
        structure.diagnostics + resources.diagnostics,
        resources.resource,
        resources.platform,
    )


def validate_workload(
    design: DesignSpec,
    workload: WorkloadSpec,
    platform: Optional[PlatformSpec] = None,
    buffer_multiplier: int = 2,
) -> ValidationReport:
    """Size-dependent checks for running ``workload`` on ``design``."""

    plat = resolve_platform(design, platform)
    diags = DiagnosticCollector()
    if isinstance(workload, Fft) and design.pus:
        per_core = fft_core_buffer_bytes(
            workload.samples, len(design.pus), buffer_multiplier=buffer_multiplier
        )
        if per_core >= plat.core_local_mem_bytes:
            diags.error(
                "KERNEL_MEM_EXCEEDED", "$.workload",
                f"{workload.samples}-sample transform needs {per_core} bytes per core "
                f"across {len(design.pus)} PU(s), core memory is {plat.core_local_mem_bytes}",
            )
    return diags.report()
