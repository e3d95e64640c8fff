"""Reading and writing ``.ea4rca.json`` design files.

The on-disk layout mirrors the model one-to-one. Unknown fields are kept
in a side map (keyed by config path) so that files written by newer tools
survive a load/save round trip unchanged. Serialization is deterministic:
the same document always produces byte-identical text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .diagnostics import Diagnostic, DiagnosticCollector, ValidationReport
from .model import (
    AmcMode,
    AmcSpec,
    Butterfly,
    Cascade,
    CcTopology,
    CoreSelector,
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
    core_count,
    selector_format,
    selector_parse,
)

FORMAT_VERSION = "1.0"
FILE_SUFFIX = ".ea4rca.json"

Extras = Dict[str, Dict[str, object]]


@dataclass(frozen=True)
class ConfigDocument:
    """A design plus whatever unrecognized fields the source file carried."""

    design: DesignSpec
    extras: Extras = field(default_factory=dict)
    format_version: str = FORMAT_VERSION


class ConfigParseError(Exception):
    def __init__(self, diagnostics: Tuple[Diagnostic, ...]):
        self.diagnostics = diagnostics
        lines = "\n".join(d.render() for d in diagnostics)
        super().__init__(f"config rejected:\n{lines}")


# ---------------------------------------------------------------------------
# CC topology expressions


def cc_to_expr(cc: CcTopology) -> str:
    if isinstance(cc, Single):
        return "Single"
    if isinstance(cc, Cascade):
        return f"Cascade<{cc.n}>"
    if isinstance(cc, Butterfly):
        return f"Butterfly<{cc.cores}>"
    if isinstance(cc, Parallel):
        return f"Parallel<{cc.k}>*{cc_to_expr(cc.inner)}"
    raise TypeError(f"not a CC topology: {cc!r}")


def cc_leaf_kernel(cc: CcTopology) -> Optional[str]:
    if isinstance(cc, Single):
        return cc.kernel
    if isinstance(cc, Cascade):
        return cc.kernel
    if isinstance(cc, Parallel):
        return cc_leaf_kernel(cc.inner)
    return None


def cc_from_expr(expr: str, kernel: Optional[str], stage_kernels: Tuple[str, ...]) -> CcTopology:
    """Build a topology from an expression like ``Parallel<16>*Cascade<4>``.

    ``kernel`` binds the leaf of Single/Cascade forms; ``stage_kernels``
    binds Butterfly stages. Raises ValueError on malformed input.
    """

    factors = [f.strip() for f in expr.split("*")]
    if any(not f for f in factors):
        raise ValueError(f"empty factor in CC expression {expr!r}")

    def parse_factor(f: str) -> Tuple[str, Optional[int]]:
        if "<" in f:
            if not f.endswith(">"):
                raise ValueError(f"unterminated argument in {f!r}")
            name, arg = f[:-1].split("<", 1)
            if not arg.isdigit():
                raise ValueError(f"non-integer argument in {f!r}")
            return name.strip(), int(arg)
        return f, None

    head = factors[-1]
    name, arg = parse_factor(head)
    leaf: CcTopology
    if name == "Single":
        if arg is not None:
            raise ValueError("Single takes no argument")
        if kernel is None:
            raise ValueError("Single requires a kernel binding")
        leaf = Single(kernel)
    elif name == "Cascade":
        if arg is None:
            raise ValueError("Cascade<n> requires an argument")
        if kernel is None:
            raise ValueError("Cascade requires a kernel binding")
        leaf = Cascade(arg, kernel)
    elif name == "Butterfly":
        if arg is None:
            raise ValueError("Butterfly<n> requires an argument")
        if not stage_kernels:
            raise ValueError("Butterfly requires stage_kernels")
        leaf = Butterfly(arg, tuple(stage_kernels))
    else:
        raise ValueError(f"unknown CC form {name!r}")

    node = leaf
    for f in reversed(factors[:-1]):
        name, arg = parse_factor(f)
        if name != "Parallel":
            raise ValueError(f"only Parallel may wrap another CC, got {name!r}")
        if arg is None:
            raise ValueError("Parallel<k> requires an argument")
        node = Parallel(arg, node)
    return node


# ---------------------------------------------------------------------------
# Decoding


class _Reader:
    """Pulls known fields out of raw dicts, accumulating extras and findings."""

    def __init__(self) -> None:
        self.diags = DiagnosticCollector()
        self.extras: Extras = {}

    def dict_at(self, value: object, path: str) -> Optional[dict]:
        if isinstance(value, dict):
            return value
        self.diags.error("BAD_TYPE", path, f"expected an object, got {type(value).__name__}")
        return None

    def take(self, raw: dict, path: str, known: Tuple[str, ...]) -> Dict[str, object]:
        got = {k: raw[k] for k in known if k in raw}
        leftover = {k: v for k, v in raw.items() if k not in known}
        if leftover:
            self.extras[path] = leftover
        return got

    def field(self, got: Dict[str, object], path: str, name: str, typ, default=None, required=False):
        if name not in got:
            if required:
                self.diags.error(
                    "MISSING_FIELD", f"{path}.{name}", f"required field {name!r} is missing"
                )
            return default
        v = got[name]
        if typ is float and isinstance(v, int):
            v = float(v)
        if typ is int and isinstance(v, bool):
            self.diags.error("BAD_TYPE", f"{path}.{name}", "expected an integer, got a boolean")
            return default
        if not isinstance(v, typ):
            self.diags.error(
                "BAD_TYPE", f"{path}.{name}",
                f"expected {typ.__name__}, got {type(v).__name__}",
            )
            return default
        return v

    def enum(self, got: Dict[str, object], path: str, name: str, enum_cls, required=True):
        raw = self.field(got, path, name, str, required=required)
        if raw is None:
            return None
        try:
            return enum_cls(raw)
        except ValueError:
            valid = ", ".join(m.value for m in enum_cls)
            self.diags.error("BAD_ENUM", f"{path}.{name}", f"{raw!r} is not one of: {valid}")
            return None


def _decode_ports(r: _Reader, raw: object, path: str) -> PortCounts:
    d = r.dict_at(raw, path)
    if d is None:
        return PortCounts()
    got = r.take(d, path, ("stream", "cascade", "dma"))
    return PortCounts(
        stream=r.field(got, path, "stream", int, 0),
        cascade=r.field(got, path, "cascade", int, 0),
        dma=r.field(got, path, "dma", int, 0),
    )


def _decode_kernel(r: _Reader, name: str, raw: object) -> Optional[KernelSpec]:
    path = f"kernels.{name}"
    d = r.dict_at(raw, path)
    if d is None:
        return None
    got = r.take(d, path, ("source_ref", "in_ports", "out_ports", "cycles_per_invocation", "local_mem_bytes"))
    return KernelSpec(
        name=name,
        source_ref=r.field(got, path, "source_ref", str, "", required=True) or "",
        in_ports=_decode_ports(r, got.get("in_ports", {}), f"{path}.in_ports"),
        out_ports=_decode_ports(r, got.get("out_ports", {}), f"{path}.out_ports"),
        cycles_per_invocation=r.field(got, path, "cycles_per_invocation", int, 0),
        local_mem_bytes=r.field(got, path, "local_mem_bytes", int, 0),
    )


def _decode_selector(r: _Reader, got: Dict[str, object], path: str, n_cores: int) -> CoreSelector:
    raw = r.field(got, path, "serves", str, required=True)
    if raw is None:
        return ()
    try:
        return selector_parse(raw, n_cores)
    except ValueError as e:
        r.diags.error("BAD_SELECTOR", f"{path}.serves", str(e))
        return ()


def _decode_connector(r: _Reader, raw: object, path: str, n_cores: int, is_dac: bool):
    d = r.dict_at(raw, path)
    if d is None:
        return None
    got = r.take(d, path, ("mode", "serves", "plio_ports", "reuse_factor", "dca_kernel"))
    mode = r.enum(got, path, "mode", XferMode)
    if mode is None:
        return None
    cls = DacSpec if is_dac else DccSpec
    return cls(
        mode=mode,
        serves=_decode_selector(r, got, path, n_cores),
        plio_ports=r.field(got, path, "plio_ports", int, 1),
        reuse_factor=r.field(got, path, "reuse_factor", int, 1),
        dca_kernel=r.field(got, path, "dca_kernel", str, None),
    )


def _decode_cc(r: _Reader, raw: object, path: str) -> Optional[CcTopology]:
    d = r.dict_at(raw, path)
    if d is None:
        return None
    got = r.take(d, path, ("expr", "kernel", "stage_kernels"))
    expr = r.field(got, path, "expr", str, required=True)
    if expr is None:
        return None
    kernel = r.field(got, path, "kernel", str, None)
    stages_raw = got.get("stage_kernels", [])
    if not isinstance(stages_raw, list) or not all(isinstance(s, str) for s in stages_raw):
        r.diags.error("BAD_TYPE", f"{path}.stage_kernels", "expected a list of kernel names")
        stages_raw = []
    try:
        return cc_from_expr(expr, kernel, tuple(stages_raw))
    except ValueError as e:
        r.diags.error("CC_EXPR", f"{path}.expr", str(e))
        return None


def _decode_pst(r: _Reader, raw: object, path: str) -> Optional[PstSpec]:
    d = r.dict_at(raw, path)
    if d is None:
        return None
    got = r.take(d, path, ("dacs", "cc", "dccs"))
    cc = _decode_cc(r, got.get("cc", {}), f"{path}.cc")
    if cc is None:
        return None
    n = core_count(cc)
    dacs: List[DacSpec] = []
    for i, item in enumerate(got.get("dacs", []) if isinstance(got.get("dacs"), list) else []):
        conn = _decode_connector(r, item, f"{path}.dacs[{i}]", n, is_dac=True)
        if conn is not None:
            dacs.append(conn)
    dccs: List[DccSpec] = []
    for i, item in enumerate(got.get("dccs", []) if isinstance(got.get("dccs"), list) else []):
        conn = _decode_connector(r, item, f"{path}.dccs[{i}]", n, is_dac=False)
        if conn is not None:
            dccs.append(conn)
    return PstSpec(dacs=tuple(dacs), cc=cc, dccs=tuple(dccs))


def _decode_pu(r: _Reader, raw: object, path: str) -> Optional[PuSpec]:
    d = r.dict_at(raw, path)
    if d is None:
        return None
    got = r.take(
        d, path,
        ("name", "psts", "per_iteration_bytes_in", "per_iteration_bytes_out", "per_iteration_ops"),
    )
    name = r.field(got, path, "name", str, required=True)
    if name is None:
        return None
    psts: List[PstSpec] = []
    raw_psts = got.get("psts", [])
    if not isinstance(raw_psts, list):
        r.diags.error("BAD_TYPE", f"{path}.psts", "expected a list")
        raw_psts = []
    for i, item in enumerate(raw_psts):
        pst = _decode_pst(r, item, f"{path}.psts[{i}]")
        if pst is not None:
            psts.append(pst)
    return PuSpec(
        name=name,
        psts=tuple(psts),
        per_iteration_bytes_in=r.field(got, path, "per_iteration_bytes_in", int, 0),
        per_iteration_bytes_out=r.field(got, path, "per_iteration_bytes_out", int, 0),
        per_iteration_ops=r.field(got, path, "per_iteration_ops", int, 0),
    )


def _decode_du(r: _Reader, raw: object, path: str) -> Optional[DuSpec]:
    d = r.dict_at(raw, path)
    if d is None:
        return None
    got = r.take(d, path, ("name", "amc", "tpc", "ssc", "onchip_buffer_bytes"))
    name = r.field(got, path, "name", str, required=True)
    if name is None:
        return None

    amc = None
    if got.get("amc") is not None:
        ad = r.dict_at(got["amc"], f"{path}.amc")
        if ad is not None:
            agot = r.take(ad, f"{path}.amc", ("mode", "burst_size", "element_bytes"))
            mode = r.enum(agot, f"{path}.amc", "mode", AmcMode)
            if mode is not None:
                amc = AmcSpec(
                    mode=mode,
                    burst_size=r.field(agot, f"{path}.amc", "burst_size", int, 0),
                    element_bytes=r.field(agot, f"{path}.amc", "element_bytes", int, 4),
                )

    tpc = TpcSpec(TpcMode.CUP)
    td = r.dict_at(got.get("tpc", {}), f"{path}.tpc")
    if td is not None:
        tgot = r.take(
            td, f"{path}.tpc",
            ("mode", "tb_bytes_in", "tb_bytes_out", "tev_per_pu_iteration", "chl_repeat_count"),
        )
        tmode = r.enum(tgot, f"{path}.tpc", "mode", TpcMode)
        tpc = TpcSpec(
            mode=tmode or TpcMode.CUP,
            tb_bytes_in=r.field(tgot, f"{path}.tpc", "tb_bytes_in", int, 0),
            tb_bytes_out=r.field(tgot, f"{path}.tpc", "tb_bytes_out", int, 0),
            tev_per_pu_iteration=r.field(tgot, f"{path}.tpc", "tev_per_pu_iteration", int, 1),
            chl_repeat_count=r.field(tgot, f"{path}.tpc", "chl_repeat_count", int, 0),
        )

    ssc = SscSpec(SscMode.SHD, SscMode.SHD)
    sd = r.dict_at(got.get("ssc", {}), f"{path}.ssc")
    if sd is not None:
        sgot = r.take(sd, f"{path}.ssc", ("sender_mode", "receiver_mode", "buffer_bytes"))
        smode = r.enum(sgot, f"{path}.ssc", "sender_mode", SscMode)
        rmode = r.enum(sgot, f"{path}.ssc", "receiver_mode", SscMode)
        ssc = SscSpec(
            sender_mode=smode or SscMode.SHD,
            receiver_mode=rmode or SscMode.SHD,
            buffer_bytes=r.field(sgot, f"{path}.ssc", "buffer_bytes", int, 0),
        )

    return DuSpec(
        name=name,
        tpc=tpc,
        ssc=ssc,
        amc=amc,
        onchip_buffer_bytes=r.field(got, path, "onchip_buffer_bytes", int, 0),
    )


def decode_design(data: object) -> Tuple[Optional[ConfigDocument], ValidationReport]:
    """Turn parsed JSON into a ConfigDocument, collecting findings.

    Returns ``(None, report)`` when the input is too broken to build a
    design at all; otherwise the document plus any findings.
    """

    r = _Reader()
    top = r.dict_at(data, "$")
    if top is None:
        return None, r.diags.report()

    got = r.take(top, "", ("format_version", "kernels", "pus", "dus", "pairings", "platform_override"))
    version = r.field(got, "$", "format_version", str, required=True)
    if version is not None and version != FORMAT_VERSION:
        r.diags.error(
            "FORMAT_VERSION", "$.format_version",
            f"unsupported version {version!r}, expected {FORMAT_VERSION!r}",
        )

    kernels: Dict[str, KernelSpec] = {}
    kd = got.get("kernels", {})
    if not isinstance(kd, dict):
        r.diags.error("BAD_TYPE", "$.kernels", "expected an object keyed by kernel name")
        kd = {}
    for kname in kd:
        spec = _decode_kernel(r, kname, kd[kname])
        if spec is not None:
            kernels[kname] = spec

    pus: List[PuSpec] = []
    raw_pus = got.get("pus", [])
    if not isinstance(raw_pus, list):
        r.diags.error("BAD_TYPE", "$.pus", "expected a list")
        raw_pus = []
    for i, item in enumerate(raw_pus):
        pu = _decode_pu(r, item, f"pus[{i}]")
        if pu is not None:
            pus.append(pu)

    dus: List[DuSpec] = []
    raw_dus = got.get("dus", [])
    if not isinstance(raw_dus, list):
        r.diags.error("BAD_TYPE", "$.dus", "expected a list")
        raw_dus = []
    for i, item in enumerate(raw_dus):
        du = _decode_du(r, item, f"dus[{i}]")
        if du is not None:
            dus.append(du)

    pairings: Dict[str, Tuple[str, ...]] = {}
    raw_pairs = got.get("pairings", {})
    if not isinstance(raw_pairs, dict):
        r.diags.error("BAD_TYPE", "$.pairings", "expected an object keyed by DU name")
        raw_pairs = {}
    for du_name, served in raw_pairs.items():
        if not isinstance(served, list) or not all(isinstance(s, str) for s in served):
            r.diags.error("BAD_TYPE", f"$.pairings.{du_name}", "expected a list of PU names")
            continue
        pairings[du_name] = tuple(served)

    overrides = got.get("platform_override", {})
    if not isinstance(overrides, dict):
        r.diags.error("BAD_TYPE", "$.platform_override", "expected an object")
        overrides = {}

    report = r.diags.report()
    if not report.ok:
        return None, report
    design = DesignSpec(
        kernels=kernels,
        pus=tuple(pus),
        dus=tuple(dus),
        pairings=pairings,
        platform_override=dict(overrides),
    )
    return ConfigDocument(design, r.extras, version or FORMAT_VERSION), report


# ---------------------------------------------------------------------------
# Encoding


def _with_extras(d: Dict[str, object], extras: Extras, path: str) -> Dict[str, object]:
    for k in sorted(extras.get(path, {})):
        d[k] = extras[path][k]
    return d


def _encode_ports(p: PortCounts) -> Dict[str, int]:
    return {"stream": p.stream, "cascade": p.cascade, "dma": p.dma}


def _encode_connector(c, extras: Extras, path: str) -> Dict[str, object]:
    d: Dict[str, object] = {
        "mode": c.mode.value,
        "serves": selector_format(c.serves),
        "plio_ports": c.plio_ports,
        "reuse_factor": c.reuse_factor,
    }
    if c.dca_kernel is not None:
        d["dca_kernel"] = c.dca_kernel
    return _with_extras(d, extras, path)


def _encode_cc(cc: CcTopology, extras: Extras, path: str) -> Dict[str, object]:
    d: Dict[str, object] = {"expr": cc_to_expr(cc)}
    leaf = cc_leaf_kernel(cc)
    if leaf is not None:
        d["kernel"] = leaf
    inner = cc
    while isinstance(inner, Parallel):
        inner = inner.inner
    if isinstance(inner, Butterfly):
        d["stage_kernels"] = list(inner.stage_kernels)
    return _with_extras(d, extras, path)


def document_to_data(doc: ConfigDocument) -> Dict[str, object]:
    design, extras = doc.design, doc.extras
    top: Dict[str, object] = {"format_version": doc.format_version}

    kernels: Dict[str, object] = {}
    for name in sorted(design.kernels):
        k = design.kernels[name]
        kd: Dict[str, object] = {
            "source_ref": k.source_ref,
            "in_ports": _encode_ports(k.in_ports),
            "out_ports": _encode_ports(k.out_ports),
            "cycles_per_invocation": k.cycles_per_invocation,
            "local_mem_bytes": k.local_mem_bytes,
        }
        kernels[name] = _with_extras(kd, extras, f"kernels.{name}")
    top["kernels"] = kernels

    pus: List[object] = []
    for i, pu in enumerate(design.pus):
        psts: List[object] = []
        for j, pst in enumerate(pu.psts):
            ppath = f"pus[{i}].psts[{j}]"
            pd: Dict[str, object] = {
                "dacs": [
                    _encode_connector(dac, extras, f"{ppath}.dacs[{a}]")
                    for a, dac in enumerate(pst.dacs)
                ],
                "cc": _encode_cc(pst.cc, extras, f"{ppath}.cc"),
                "dccs": [
                    _encode_connector(dcc, extras, f"{ppath}.dccs[{a}]")
                    for a, dcc in enumerate(pst.dccs)
                ],
            }
            psts.append(_with_extras(pd, extras, ppath))
        pud: Dict[str, object] = {
            "name": pu.name,
            "psts": psts,
            "per_iteration_bytes_in": pu.per_iteration_bytes_in,
            "per_iteration_bytes_out": pu.per_iteration_bytes_out,
            "per_iteration_ops": pu.per_iteration_ops,
        }
        pus.append(_with_extras(pud, extras, f"pus[{i}]"))
    top["pus"] = pus

    dus: List[object] = []
    for i, du in enumerate(design.dus):
        dpath = f"dus[{i}]"
        dd: Dict[str, object] = {"name": du.name}
        if du.amc is None:
            dd["amc"] = None
        else:
            dd["amc"] = _with_extras(
                {
                    "mode": du.amc.mode.value,
                    "burst_size": du.amc.burst_size,
                    "element_bytes": du.amc.element_bytes,
                },
                extras, f"{dpath}.amc",
            )
        dd["tpc"] = _with_extras(
            {
                "mode": du.tpc.mode.value,
                "tb_bytes_in": du.tpc.tb_bytes_in,
                "tb_bytes_out": du.tpc.tb_bytes_out,
                "tev_per_pu_iteration": du.tpc.tev_per_pu_iteration,
                "chl_repeat_count": du.tpc.chl_repeat_count,
            },
            extras, f"{dpath}.tpc",
        )
        dd["ssc"] = _with_extras(
            {
                "sender_mode": du.ssc.sender_mode.value,
                "receiver_mode": du.ssc.receiver_mode.value,
                "buffer_bytes": du.ssc.buffer_bytes,
            },
            extras, f"{dpath}.ssc",
        )
        dd["onchip_buffer_bytes"] = du.onchip_buffer_bytes
        dus.append(_with_extras(dd, extras, dpath))
    top["dus"] = dus

    top["pairings"] = {name: list(design.pairings[name]) for name in sorted(design.pairings)}
    if design.platform_override:
        top["platform_override"] = {
            k: design.platform_override[k] for k in sorted(design.platform_override)
        }
    return _with_extras(top, extras, "")


def serialize_design(doc) -> str:
    """Render a ConfigDocument (or bare DesignSpec) as config-file text."""

    if isinstance(doc, DesignSpec):
        doc = ConfigDocument(doc)
    return json.dumps(document_to_data(doc), indent=2) + "\n"


# ---------------------------------------------------------------------------
# Entry points


def _decode_text(text: str) -> Tuple[Optional[ConfigDocument], ValidationReport]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        diag = Diagnostic("JSON_SYNTAX", f"$:{e.lineno}:{e.colno}", e.msg)
        return None, ValidationReport((diag,))
    return decode_design(data)


def try_parse_design(text: str) -> Tuple[Optional[ConfigDocument], ValidationReport]:
    """Decode and rule-check without raising.

    The document is ``None`` only when the text could not be decoded into
    a design at all; rule violations come back in the report alongside a
    usable document.
    """

    from .validate import validate_structure

    doc, report = _decode_text(text)
    if doc is None:
        return None, report
    structure = validate_structure(doc.design)
    merged = ValidationReport(report.diagnostics + structure.diagnostics)
    return doc, merged


def parse_design(text: str) -> ConfigDocument:
    """Decode config text and gate it through structural validation.

    Raises :class:`ConfigParseError` carrying the findings if decoding
    fails or any structural rule is violated.
    """

    doc, report = try_parse_design(text)
    if doc is None or not report.ok:
        raise ConfigParseError(report.errors or report.diagnostics)
    return doc


def load_design(path) -> ConfigDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_design(fh.read())


def save_design(path, doc) -> None:
    text = serialize_design(doc)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
