"""Dataflow-graph IR: lowering, checking, fusion and source emission.

``build_ir`` lowers a validated design into typed nodes and edges. The
emitted text dialect is a neutral, versioned format (documented in
``docs/graph-format.md``); the manifest JSON next to it is the contract
the simulator and any downstream integration consume.

Port conventions: stream input/output ports are numbered per kernel
instance in allocation order. Cascade ports are implicit; a chain's first
cascade-in and last cascade-out are left open (seeded and drained by the
hardware). Output ports nothing consumes get an explicit sink annotation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .diagnostics import DiagnosticCollector, ValidationReport
from .model import (
    DesignSpec,
    KernelSpec,
    PlatformSpec,
    PuSpec,
    XferMode,
    expand_cores,
    resolve_platform,
)

FORMAT_NAME = "ea4rca-graph"
FORMAT_VERSION = 1

PortRef = Tuple[str, int]


class InternalContractViolation(Exception):
    """A validated design failed to lower; validator and lowering disagree."""


class IdCollision(Exception):
    pass


class CombinedOverBudget(Exception):
    pass


class UnresolvedKernel(Exception):
    pass


@dataclass(frozen=True)
class KernelNode:
    id: str
    kernel: str
    pst_index: int
    role: str  # "cc" | "dca" | "dcc-dca"
    in_streams: int
    out_streams: int


@dataclass(frozen=True)
class PlioNode:
    id: str
    direction: str  # "in" | "out"
    bytes_per_iteration: int = 0


@dataclass(frozen=True)
class StreamEdge:
    src: PortRef
    dst: PortRef


@dataclass(frozen=True)
class CascadeEdge:
    src: str
    dst: str


@dataclass(frozen=True)
class BroadcastEdge:
    src: PortRef
    dsts: Tuple[PortRef, ...]


@dataclass(frozen=True)
class PacketEdge:
    src: PortRef
    dsts: Tuple[PortRef, ...]
    tags: Tuple[int, ...]


@dataclass(frozen=True)
class GraphIr:
    name: str
    nodes: Tuple[KernelNode, ...] = ()
    plios: Tuple[PlioNode, ...] = ()
    stream_edges: Tuple[StreamEdge, ...] = ()
    cascade_edges: Tuple[CascadeEdge, ...] = ()
    broadcast_edges: Tuple[BroadcastEdge, ...] = ()
    packet_edges: Tuple[PacketEdge, ...] = ()
    sinks: Tuple[PortRef, ...] = ()

    def edge_count(self) -> int:
        return (
            len(self.stream_edges)
            + len(self.cascade_edges)
            + len(self.broadcast_edges)
            + len(self.packet_edges)
        )


@dataclass(frozen=True)
class StoredGraph:
    name: str
    ir: GraphIr
    provenance: Dict[str, str] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Lowering


class _PortLedger:
    """Tracks free stream ports per kernel instance during lowering."""

    def __init__(self) -> None:
        self.decl_in: Dict[str, int] = {}
        self.decl_out: Dict[str, int] = {}
        self.next_in: Dict[str, int] = {}
        self.next_out: Dict[str, int] = {}

    def add(self, node_id: str, in_streams: int, out_streams: int) -> None:
        self.decl_in[node_id] = in_streams
        self.decl_out[node_id] = out_streams
        self.next_in[node_id] = 0
        self.next_out[node_id] = 0

    def claim_in(self, node_id: str) -> PortRef:
        p = self.next_in[node_id]
        if p >= self.decl_in[node_id]:
            raise InternalContractViolation(
                f"{node_id} has no free stream input port (all {p} taken)"
            )
        self.next_in[node_id] = p + 1
        return (node_id, p)

    def claim_out(self, node_id: str) -> PortRef:
        p = self.next_out[node_id]
        if p >= self.decl_out[node_id]:
            raise InternalContractViolation(
                f"{node_id} has no free stream output port (all {p} taken)"
            )
        self.next_out[node_id] = p + 1
        return (node_id, p)


class _Builder:
    def __init__(self, design: DesignSpec, platform: PlatformSpec):
        self.design = design
        self.platform = platform
        self.nodes: List[KernelNode] = []
        self.plios: List[PlioNode] = []
        self.stream: List[StreamEdge] = []
        self.cascade: List[CascadeEdge] = []
        self.broadcast: List[BroadcastEdge] = []
        self.packet: List[PacketEdge] = []
        self.ports = _PortLedger()

    def kernel_spec(self, name: str) -> KernelSpec:
        try:
            return self.design.kernels[name]
        except KeyError:
            raise InternalContractViolation(f"kernel {name!r} is not declared")

    def add_kernel(self, node_id: str, kernel: str, pst: int, role: str, n_in: int, n_out: int) -> None:
        self.kernel_spec(kernel)  # must resolve
        self.nodes.append(KernelNode(node_id, kernel, pst, role, n_in, n_out))
        self.ports.add(node_id, n_in, n_out)

    def add_plio(self, plio_id: str, direction: str, bytes_per_iter: int) -> PortRef:
        self.plios.append(PlioNode(plio_id, direction, bytes_per_iter))
        return (plio_id, 0)

    # -- per-PU lowering ----------------------------------------------------

    def lower_pu(self, pu: PuSpec) -> None:
        core_ids: List[List[str]] = []
        for j, pst in enumerate(pu.psts):
            sites = expand_cores(pst.cc)
            ids = [f"{pu.name}_s{j}_c{s.index}" for s in sites]
            core_ids.append(ids)
            for s in sites:
                spec = self.kernel_spec(s.kernel)
                # Cascade interiors neither take stream feeds nor expose
                # stream outputs; heads and tails carry the declared ports.
                # Butterfly pipelines use stream ports at every stage.
                n_in, n_out = spec.in_ports.stream, spec.out_ports.stream
                if s.kind == "cascade":
                    if s.chain_pos > 0:
                        n_in = 0
                    if s.chain_pos < s.chain_len - 1:
                        n_out = 0
                self.add_kernel(ids[s.index], s.kernel, j, "cc", n_in, n_out)
            # cascade chains and butterfly pipelines
            for s in sites:
                if s.chain_pos == 0:
                    continue
                prev = sites[s.index - 1]
                if prev.chain_id != s.chain_id:
                    raise InternalContractViolation("chain cores are not contiguous")
                if s.kind == "cascade":
                    self.cascade.append(CascadeEdge(ids[s.index - 1], ids[s.index]))
                else:  # butterfly pipeline hop rides a stream link
                    self.stream.append(
                        StreamEdge(
                            self.ports.claim_out(ids[s.index - 1]),
                            self.ports.claim_in(ids[s.index]),
                        )
                    )

        n_in = pu.per_iteration_bytes_in
        n_out = pu.per_iteration_bytes_out
        first_ports = sum(d.plio_ports for d in pu.psts[0].dacs)
        last_ports = sum(d.plio_ports for d in pu.psts[-1].dccs)

        # first PST: DACs fed from PLIO
        plio_idx = 0
        for k, dac in enumerate(pu.psts[0].dacs):
            for p in range(dac.plio_ports):
                share = n_in // first_ports + (1 if plio_idx < n_in % first_ports else 0)
                src = self.add_plio(f"{pu.name}_in{plio_idx}", "in", share)
                plio_idx += 1
                self.connect_dac(dac, src, p, core_ids[0], 0, f"{pu.name}_s0_dac{k}")

        # interior boundaries
        for j in range(len(pu.psts) - 1):
            outs = self.internal_outputs(pu, j, core_ids[j])
            ins = self.internal_inputs(pu, j + 1, core_ids[j + 1])
            if len(outs) != len(ins):
                raise InternalContractViolation(
                    f"{pu.name} stage {j}->{j + 1} carries {len(outs)} vs {len(ins)} ports"
                )
            for src, dst in zip(outs, ins):
                self.stream.append(StreamEdge(src, dst))

        # last PST: DCCs drain to PLIO
        plio_idx = 0
        last = len(pu.psts) - 1
        for k, dcc in enumerate(pu.psts[last].dccs):
            for p in range(dcc.plio_ports):
                share = n_out // last_ports + (1 if plio_idx < n_out % last_ports else 0)
                dst = self.add_plio(f"{pu.name}_out{plio_idx}", "out", share)
                plio_idx += 1
                self.connect_dcc(dcc, dst, p, core_ids[last], last, f"{pu.name}_s{last}_dcc{k}")

    def served_for_port(self, conn, port: int) -> List[int]:
        """Round-robin split of served cores over the connector's ports."""

        return [c for i, c in enumerate(conn.serves) if i % conn.plio_ports == port]

    def connect_dac(self, dac, src: PortRef, port: int, ids: List[str], pst: int, stem: str) -> None:
        served = self.served_for_port(dac, port)
        if dac.mode is XferMode.DIR:
            self.stream.append(StreamEdge(src, self.ports.claim_in(ids[served[0]])))
        elif dac.mode is XferMode.BDC:
            dsts = tuple(self.ports.claim_in(ids[c]) for c in served)
            self.broadcast.append(BroadcastEdge(src, dsts))
        elif dac.mode is XferMode.SWH:
            fan = self.platform.packet_switch_fanout_max
            for g in range(0, len(served), fan):
                group = served[g : g + fan]
                dsts = tuple(self.ports.claim_in(ids[c]) for c in group)
                self.packet.append(PacketEdge(src, dsts, tuple(range(g, g + len(group)))))
        elif dac.mode is XferMode.DCA:
            node_id = f"{stem}_dca" if dac.plio_ports == 1 else f"{stem}p{port}_dca"
            self.add_dca_node(node_id, dac.dca_kernel, pst, "dca", 1, len(served))
            self.stream.append(StreamEdge(src, (node_id, 0)))
            for i, c in enumerate(served):
                self.stream.append(StreamEdge((node_id, i), self.ports.claim_in(ids[c])))
        else:
            raise InternalContractViolation(f"DAC mode {dac.mode} cannot be lowered")

    def connect_dcc(self, dcc, dst: PortRef, port: int, ids: List[str], pst: int, stem: str) -> None:
        served = self.served_for_port(dcc, port)
        if dcc.mode is XferMode.DIR:
            self.stream.append(StreamEdge(self.ports.claim_out(ids[served[0]]), dst))
        elif dcc.mode is XferMode.SWH:
            for i, c in enumerate(served):
                self.packet.append(
                    PacketEdge(self.ports.claim_out(ids[c]), (dst,), (i,))
                )
        elif dcc.mode is XferMode.DCA:
            node_id = f"{stem}_dca" if dcc.plio_ports == 1 else f"{stem}p{port}_dca"
            self.add_dca_node(node_id, dcc.dca_kernel, pst, "dcc-dca", len(served), 1)
            for i, c in enumerate(served):
                self.stream.append(StreamEdge(self.ports.claim_out(ids[c]), (node_id, i)))
            self.stream.append(StreamEdge((node_id, 0), dst))
        else:
            raise InternalContractViolation(f"DCC mode {dcc.mode} cannot be lowered")

    def add_dca_node(self, node_id: str, kernel: Optional[str], pst: int, role: str, n_in: int, n_out: int) -> None:
        if kernel is None:
            raise InternalContractViolation(f"{node_id}: DCA connector names no kernel")
        self.add_kernel(node_id, kernel, pst, role, n_in, n_out)

    def internal_outputs(self, pu: PuSpec, j: int, ids: List[str]) -> List[PortRef]:
        """Flattened upstream endpoints of the stage boundary after PST j."""

        out: List[PortRef] = []
        for k, dcc in enumerate(pu.psts[j].dccs):
            if dcc.mode is XferMode.DIR:
                for _ in range(dcc.plio_ports):
                    out.append(self.ports.claim_out(ids[dcc.serves[0]]))
            elif dcc.mode is XferMode.DCA:
                node_id = f"{pu.name}_s{j}_dcc{k}_dca"
                self.add_dca_node(node_id, dcc.dca_kernel, j, "dcc-dca", len(dcc.serves), dcc.plio_ports)
                for i, c in enumerate(dcc.serves):
                    self.stream.append(StreamEdge(self.ports.claim_out(ids[c]), (node_id, i)))
                for p in range(dcc.plio_ports):
                    out.append((node_id, p))
            else:
                raise InternalContractViolation(
                    f"{pu.name} stage {j}: {dcc.mode.value} DCC cannot feed a following stage"
                )
        return out

    def internal_inputs(self, pu: PuSpec, j: int, ids: List[str]) -> List[PortRef]:
        """Flattened downstream endpoints of the stage boundary before PST j."""

        ins: List[PortRef] = []
        for k, dac in enumerate(pu.psts[j].dacs):
            if dac.mode is XferMode.DIR:
                for _ in range(dac.plio_ports):
                    ins.append(self.ports.claim_in(ids[dac.serves[0]]))
            elif dac.mode is XferMode.DCA:
                node_id = f"{pu.name}_s{j}_dac{k}_dca"
                self.add_dca_node(node_id, dac.dca_kernel, j, "dca", dac.plio_ports, len(dac.serves))
                for i, c in enumerate(dac.serves):
                    self.stream.append(StreamEdge((node_id, i), self.ports.claim_in(ids[c])))
                for p in range(dac.plio_ports):
                    ins.append((node_id, p))
            else:
                raise InternalContractViolation(
                    f"{pu.name} stage {j}: {dac.mode.value} DAC cannot read a preceding stage"
                )
        return ins

    def finish(self, name: str) -> GraphIr:
        sinks: List[PortRef] = []
        for node in self.nodes:
            for p in range(self.ports.next_out[node.id], node.out_streams):
                sinks.append((node.id, p))
            if self.ports.next_in[node.id] != node.in_streams:
                raise InternalContractViolation(
                    f"{node.id}: {self.ports.next_in[node.id]} of "
                    f"{node.in_streams} stream inputs driven"
                )
        return GraphIr(
            name=name,
            nodes=tuple(self.nodes),
            plios=tuple(self.plios),
            stream_edges=tuple(self.stream),
            cascade_edges=tuple(self.cascade),
            broadcast_edges=tuple(self.broadcast),
            packet_edges=tuple(self.packet),
            sinks=tuple(sinks),
        )


def build_ir(
    design: DesignSpec, platform: Optional[PlatformSpec] = None, name: str = "design"
) -> GraphIr:
    """Lower a deployable design to graph IR.

    Instances come out ordered by (PU, PST index, canonical core index);
    connection order follows the connector declarations. Raises
    :class:`InternalContractViolation` for designs the validator would
    reject.
    """

    plat = resolve_platform(design, platform)
    b = _Builder(design, plat)
    for pu in design.pus:
        if not pu.psts:
            raise InternalContractViolation(f"{pu.name} has no PST stages")
        b.lower_pu(pu)
    return b.finish(name)


# ---------------------------------------------------------------------------
# Checking


def check_ir(ir: GraphIr, platform: Optional[PlatformSpec] = None) -> ValidationReport:
    """Verify every IR invariant; an empty report means well-formed."""

    plat = platform or PlatformSpec()
    diags = DiagnosticCollector()

    kernel_ids = {}
    for n in ir.nodes:
        if n.id in kernel_ids:
            diags.error("DUP_NODE_ID", n.id, "node id declared twice")
        kernel_ids[n.id] = n
    plio_ids = {}
    for p in ir.plios:
        if p.id in kernel_ids or p.id in plio_ids:
            diags.error("DUP_NODE_ID", p.id, "node id declared twice")
        plio_ids[p.id] = p

    drive: Dict[PortRef, int] = {}
    consume: Dict[str, int] = {}
    out_used: Dict[PortRef, int] = {}

    def check_src(ref: PortRef, path: str) -> None:
        nid, port = ref
        if nid in kernel_ids:
            if port >= kernel_ids[nid].out_streams:
                diags.error("BAD_PORT", path, f"{nid} has no output port {port}")
            out_used[ref] = out_used.get(ref, 0) + 1
        elif nid in plio_ids:
            if plio_ids[nid].direction != "in":
                diags.error("BAD_PORT", path, f"{nid} is not an input endpoint")
            consume[nid] = consume.get(nid, 0)  # marks plio as referenced
            out_used[ref] = out_used.get(ref, 0) + 1
        else:
            diags.error("UNKNOWN_NODE", path, f"edge references undeclared node {nid!r}")

    def check_dst(ref: PortRef, path: str) -> None:
        nid, port = ref
        if nid in kernel_ids:
            if port >= kernel_ids[nid].in_streams:
                diags.error("BAD_PORT", path, f"{nid} has no input port {port}")
            drive[ref] = drive.get(ref, 0) + 1
        elif nid in plio_ids:
            if plio_ids[nid].direction != "out":
                diags.error("BAD_PORT", path, f"{nid} is not an output endpoint")
            consume[nid] = consume.get(nid, 0) + 1
        else:
            diags.error("UNKNOWN_NODE", path, f"edge references undeclared node {nid!r}")

    for i, e in enumerate(ir.stream_edges):
        check_src(e.src, f"stream[{i}]")
        check_dst(e.dst, f"stream[{i}]")
    for i, e in enumerate(ir.broadcast_edges):
        check_src(e.src, f"broadcast[{i}]")
        for d in e.dsts:
            check_dst(d, f"broadcast[{i}]")
    for i, e in enumerate(ir.packet_edges):
        check_src(e.src, f"packet[{i}]")
        for d in e.dsts:
            check_dst(d, f"packet[{i}]")
        if len(e.dsts) > plat.packet_switch_fanout_max:
            diags.error(
                "PACKET_FANOUT", f"packet[{i}]",
                f"{len(e.dsts)} destinations exceed fan-out {plat.packet_switch_fanout_max}",
            )
        if len(e.tags) != len(e.dsts):
            diags.error("PACKET_TAGS", f"packet[{i}]", "one tag per destination required")

    casc_out: Dict[str, int] = {}
    casc_in: Dict[str, int] = {}
    for i, e in enumerate(ir.cascade_edges):
        for nid in (e.src, e.dst):
            if nid not in kernel_ids:
                diags.error("UNKNOWN_NODE", f"cascade[{i}]", f"undeclared node {nid!r}")
        casc_out[e.src] = casc_out.get(e.src, 0) + 1
        casc_in[e.dst] = casc_in.get(e.dst, 0) + 1
    for nid, cnt in sorted(casc_out.items()):
        if cnt > 1:
            diags.error("CASCADE_SHAPE", nid, f"{cnt} outgoing cascade links")
    for nid, cnt in sorted(casc_in.items()):
        if cnt > 1:
            diags.error("CASCADE_SHAPE", nid, f"{cnt} incoming cascade links")
    # chains must be acyclic: follow successors
    nxt = {e.src: e.dst for e in ir.cascade_edges}
    visited: Dict[str, int] = {}
    for start in nxt:
        if start in visited:
            continue
        seen = []
        cur = start
        while cur in nxt and cur not in visited:
            visited[cur] = 1
            seen.append(cur)
            cur = nxt[cur]
            if cur in seen:
                diags.error("CASCADE_SHAPE", cur, "cascade links form a cycle")
                break

    sink_set = set(ir.sinks)
    for n in ir.nodes:
        for p in range(n.in_streams):
            got = drive.get((n.id, p), 0)
            if got == 0:
                diags.error("UNDRIVEN_PORT", f"{n.id}:{p}", "stream input has no driving edge")
            elif got > 1:
                diags.error("MULTI_DRIVEN", f"{n.id}:{p}", f"stream input driven {got} times")
        for p in range(n.out_streams):
            if out_used.get((n.id, p), 0) == 0 and (n.id, p) not in sink_set:
                diags.error(
                    "UNCONSUMED_PORT", f"{n.id}:{p}",
                    "stream output has no consumer and no sink annotation",
                )
    for p in ir.plios:
        if p.direction == "in":
            if not any(ref[0] == p.id for ref in out_used):
                diags.error("UNCONSUMED_PORT", p.id, "input endpoint feeds nothing")
        else:
            if consume.get(p.id, 0) == 0:
                diags.error("UNDRIVEN_PORT", p.id, "output endpoint has no driver")

    return diags.report()


# ---------------------------------------------------------------------------
# Fusion


def _prefix_ref(ref: PortRef, prefix: str) -> PortRef:
    return (prefix + ref[0], ref[1])


def _prefix_ir(ir: GraphIr, prefix: str) -> GraphIr:
    return GraphIr(
        name=ir.name,
        nodes=tuple(replace(n, id=prefix + n.id) for n in ir.nodes),
        plios=tuple(replace(p, id=prefix + p.id) for p in ir.plios),
        stream_edges=tuple(
            StreamEdge(_prefix_ref(e.src, prefix), _prefix_ref(e.dst, prefix))
            for e in ir.stream_edges
        ),
        cascade_edges=tuple(
            CascadeEdge(prefix + e.src, prefix + e.dst) for e in ir.cascade_edges
        ),
        broadcast_edges=tuple(
            BroadcastEdge(
                _prefix_ref(e.src, prefix),
                tuple(_prefix_ref(d, prefix) for d in e.dsts),
            )
            for e in ir.broadcast_edges
        ),
        packet_edges=tuple(
            PacketEdge(
                _prefix_ref(e.src, prefix),
                tuple(_prefix_ref(d, prefix) for d in e.dsts),
                e.tags,
            )
            for e in ir.packet_edges
        ),
        sinks=tuple(_prefix_ref(s, prefix) for s in ir.sinks),
    )


def fuse(
    base: GraphIr,
    addition,
    prefix: str,
    platform: Optional[PlatformSpec] = None,
) -> GraphIr:
    """Merge a stored graph into ``base``, renaming the addition with ``prefix``.

    Node and edge counts of the result are exact sums. Budget limits are
    enforced only when a platform is given.
    """

    add_ir = addition.ir if isinstance(addition, StoredGraph) else addition
    renamed = _prefix_ir(add_ir, prefix)
    base_ids = {n.id for n in base.nodes} | {p.id for p in base.plios}
    new_ids = {n.id for n in renamed.nodes} | {p.id for p in renamed.plios}
    clashes = sorted(base_ids & new_ids)
    if clashes:
        raise IdCollision(f"prefixed ids already present: {clashes[:5]}")

    merged = GraphIr(
        name=base.name,
        nodes=base.nodes + renamed.nodes,
        plios=base.plios + renamed.plios,
        stream_edges=base.stream_edges + renamed.stream_edges,
        cascade_edges=base.cascade_edges + renamed.cascade_edges,
        broadcast_edges=base.broadcast_edges + renamed.broadcast_edges,
        packet_edges=base.packet_edges + renamed.packet_edges,
        sinks=base.sinks + renamed.sinks,
    )
    if platform is not None:
        cores = len(merged.nodes)
        n_in = sum(1 for p in merged.plios if p.direction == "in")
        n_out = sum(1 for p in merged.plios if p.direction == "out")
        over = []
        if cores > platform.aie_core_count:
            over.append(f"cores {cores}/{platform.aie_core_count}")
        if n_in > platform.plio_count:
            over.append(f"plio in {n_in}/{platform.plio_count}")
        if n_out > platform.plio_count:
            over.append(f"plio out {n_out}/{platform.plio_count}")
        if over:
            raise CombinedOverBudget("; ".join(over))
    return merged


def structural_signature(ir: GraphIr) -> str:
    """Renaming-invariant fingerprint used to compare fusion results.

    Equal signatures are necessary for isomorphism (node ids are erased);
    good enough to compare differently-associated fusions of the same parts.
    """

    kind: Dict[str, str] = {}
    for n in ir.nodes:
        kind[n.id] = f"k:{n.kernel}/{n.role}/{n.pst_index}"
    for p in ir.plios:
        kind[p.id] = f"p:{p.direction}/{p.bytes_per_iteration}"

    items: List[str] = sorted(kind.values())
    edges: List[str] = []
    for e in ir.stream_edges:
        edges.append(f"s {kind[e.src[0]]}:{e.src[1]} > {kind[e.dst[0]]}:{e.dst[1]}")
    for e in ir.cascade_edges:
        edges.append(f"c {kind[e.src]} > {kind[e.dst]}")
    for e in ir.broadcast_edges:
        dsts = ",".join(sorted(f"{kind[d[0]]}:{d[1]}" for d in e.dsts))
        edges.append(f"b {kind[e.src[0]]}:{e.src[1]} > {dsts}")
    for e in ir.packet_edges:
        dsts = ",".join(sorted(f"{kind[d[0]]}:{d[1]}#{t}" for d, t in zip(e.dsts, e.tags)))
        edges.append(f"x {kind[e.src[0]]}:{e.src[1]} > {dsts}")
    sinks = sorted(f"{kind[s[0]]}:{s[1]}" for s in ir.sinks)
    return "\n".join(items) + "\n--\n" + "\n".join(sorted(edges)) + "\n--\n" + "\n".join(sinks)


# ---------------------------------------------------------------------------
# Serialization (repository storage format)


def ir_to_data(ir: GraphIr) -> Dict[str, object]:
    return {
        "format": FORMAT_VERSION,
        "name": ir.name,
        "nodes": [
            [n.id, n.kernel, n.pst_index, n.role, n.in_streams, n.out_streams]
            for n in ir.nodes
        ],
        "plios": [[p.id, p.direction, p.bytes_per_iteration] for p in ir.plios],
        "stream_edges": [[*e.src, *e.dst] for e in ir.stream_edges],
        "cascade_edges": [[e.src, e.dst] for e in ir.cascade_edges],
        "broadcast_edges": [
            [list(e.src), [list(d) for d in e.dsts]] for e in ir.broadcast_edges
        ],
        "packet_edges": [
            [list(e.src), [list(d) for d in e.dsts], list(e.tags)]
            for e in ir.packet_edges
        ],
        "sinks": [list(s) for s in ir.sinks],
    }


def ir_from_data(data: Dict[str, object]) -> GraphIr:
    def ref(pair) -> PortRef:
        return (pair[0], pair[1])

    return GraphIr(
        name=data["name"],
        nodes=tuple(KernelNode(*row) for row in data["nodes"]),
        plios=tuple(PlioNode(*row) for row in data["plios"]),
        stream_edges=tuple(
            StreamEdge((r[0], r[1]), (r[2], r[3])) for r in data["stream_edges"]
        ),
        cascade_edges=tuple(CascadeEdge(r[0], r[1]) for r in data["cascade_edges"]),
        broadcast_edges=tuple(
            BroadcastEdge(ref(r[0]), tuple(ref(d) for d in r[1]))
            for r in data["broadcast_edges"]
        ),
        packet_edges=tuple(
            PacketEdge(ref(r[0]), tuple(ref(d) for d in r[1]), tuple(r[2]))
            for r in data["packet_edges"]
        ),
        sinks=tuple(ref(s) for s in data["sinks"]),
    )


# ---------------------------------------------------------------------------
# Emission


def _fmt_ref(ref: PortRef) -> str:
    return f"{ref[0]}:{ref[1]}"


def emit_graph_source(ir: GraphIr, repo) -> Dict[str, str]:
    """Render the IR as graph text plus a manifest, keyed by output path.

    ``repo`` resolves kernel names to their source references; raises
    :class:`UnresolvedKernel` when one is missing.
    """

    lines: List[str] = [f"# {FORMAT_NAME} {FORMAT_VERSION}", f"graph {ir.name} {{"]
    for n in ir.nodes:
        spec = repo.get_kernel(n.kernel)
        if spec is None:
            raise UnresolvedKernel(f"kernel {n.kernel!r} not in repository")
        lines.append(
            f"  kernel {n.id} src={spec.source_ref} pst={n.pst_index} role={n.role}"
        )
    for p in ir.plios:
        lines.append(f"  plio_{p.direction} {p.id}")
    lines.append("")
    for e in ir.stream_edges:
        lines.append(f"  stream {_fmt_ref(e.src)} -> {_fmt_ref(e.dst)}")
    for e in ir.cascade_edges:
        lines.append(f"  cascade {e.src} -> {e.dst}")
    for e in ir.broadcast_edges:
        dsts = " ".join(_fmt_ref(d) for d in e.dsts)
        lines.append(f"  broadcast {_fmt_ref(e.src)} -> {dsts}")
    for stmt in _packet_statements(ir):
        lines.append(f"  {stmt}")
    for s in ir.sinks:
        lines.append(f"  sink {_fmt_ref(s)}")
    lines.append("}")
    text = "\n".join(lines) + "\n"

    manifest = {
        "format": FORMAT_VERSION,
        "design": ir.name,
        "plio": [
            {
                "name": p.id,
                "direction": p.direction,
                "bytes_per_iteration": p.bytes_per_iteration,
            }
            for p in ir.plios
        ],
        "kernel_instances": len(ir.nodes),
        "connections": {
            "stream": len(ir.stream_edges),
            "cascade": len(ir.cascade_edges),
            "broadcast": len(ir.broadcast_edges),
            "packet": len(ir.packet_edges),
        },
    }
    return {
        f"graph/{ir.name}.graph.txt": text,
        f"graph/{ir.name}.manifest.json": json.dumps(manifest, indent=2) + "\n",
    }


def _packet_statements(ir: GraphIr) -> List[str]:
    """One statement per packet channel.

    Fan-out edges print directly. Fan-in edges (singleton destination,
    as DCC-side multiplexing produces) sharing a destination are merged
    into a single statement so each physical channel reads as one line.
    """

    stmts: List[str] = []
    merged: Dict[PortRef, List[Tuple[PortRef, int]]] = {}
    order: List[PortRef] = []
    for e in ir.packet_edges:
        if len(e.dsts) == 1 and e.dsts[0][0] not in {n.id for n in ir.nodes}:
            dst = e.dsts[0]
            if dst not in merged:
                merged[dst] = []
                order.append(dst)
            merged[dst].append((e.src, e.tags[0]))
        else:
            srcs = _fmt_ref(e.src)
            dsts = " ".join(f"{_fmt_ref(d)}#{t}" for d, t in zip(e.dsts, e.tags))
            stmts.append(f"packet {srcs} -> {dsts}")
    for dst in order:
        srcs = " ".join(f"{_fmt_ref(s)}#{t}" for s, t in merged[dst])
        stmts.append(f"packet {srcs} -> {_fmt_ref(dst)}")
    return stmts


def statement_census(text: str) -> Dict[str, int]:
    """Count connection statements by keyword in emitted graph text."""

    counts: Dict[str, int] = {"stream": 0, "cascade": 0, "broadcast": 0, "packet": 0, "sink": 0}
    for line in text.splitlines():
        word = line.strip().split(" ", 1)[0]
        if word in counts:
            counts[word] += 1
    return counts
