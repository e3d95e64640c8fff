"""Content-addressed kernel and graph storage."""

import dataclasses

import pytest

from ea4rca.graphir import build_ir
from ea4rca.model import KernelSpec, PortCounts
from ea4rca.repo import (
    GraphRepository,
    KernelRepository,
    NotFound,
    kernel_from_data,
    kernel_to_data,
    repo_for_design,
)
from ea4rca.workloads import template_design

SPEC = KernelSpec(
    name="mac32",
    source_ref="kernels/mac32.cc",
    in_ports=PortCounts(stream=1),
    out_ports=PortCounts(stream=1),
    cycles_per_invocation=900,
    local_mem_bytes=4096,
)


def test_registration_is_content_addressed():
    repo = KernelRepository()
    rev1 = repo.register_kernel(SPEC, source_text="void mac32() {}")
    rev2 = repo.register_kernel(SPEC, source_text="void mac32() {}")
    assert rev1 == rev2
    rev3 = repo.register_kernel(SPEC, source_text="void mac32() { /* v2 */ }")
    assert rev3 != rev1
    changed = dataclasses.replace(SPEC, cycles_per_invocation=901)
    assert repo.register_kernel(changed, "void mac32() {}") != rev1


def test_kernel_lookup_and_source():
    repo = KernelRepository()
    repo.register_kernel(SPEC, source_text="void mac32() {}")
    assert repo.get_kernel("mac32") == SPEC
    assert repo.get_kernel("nope") is None
    assert repo.kernel_source("mac32") == "void mac32() {}"
    assert repo.list_kernels() == ["mac32"]


def test_kernel_spec_data_round_trip():
    data = kernel_to_data(SPEC)
    assert kernel_from_data(data) == SPEC


def test_graph_storage_and_revisions():
    repo = GraphRepository()
    ir = build_ir(template_design("fft"), name="fft")
    rev = repo.save_graph("fft", ir, provenance={"origin": "template"})
    stored = repo.load_graph("fft")
    assert stored.ir == ir
    assert stored.provenance.get("origin") == "template"
    # same IR saves to the same revision regardless of provenance text
    again = repo.save_graph("fft", ir, provenance={"origin": "rebuilt"})
    assert again == rev
    by_rev = repo.load_graph(rev)
    assert by_rev.ir == ir
    other = build_ir(template_design("mmt"), name="fft")
    assert repo.save_graph("fft", other) != rev
    assert repo.list_graphs() == ["fft"]
    with pytest.raises(NotFound):
        repo.load_graph("missing")


def test_on_disk_persistence(tmp_path):
    root = tmp_path / "store"
    repo = KernelRepository(root)
    repo.register_kernel(SPEC, source_text="void mac32() {}")
    reopened = KernelRepository(root)
    assert reopened.get_kernel("mac32") == SPEC
    assert reopened.kernel_source("mac32") == "void mac32() {}"

    groot = tmp_path / "graphs"
    grepo = GraphRepository(groot)
    ir = build_ir(template_design("mm"), name="mm")
    rev = grepo.save_graph("mm", ir)
    assert GraphRepository(groot).load_graph("mm").ir == ir
    assert GraphRepository(groot).load_graph(rev).ir == ir


def test_repo_for_design_seeds_all_kernels():
    design = template_design("filter2d")
    repo = repo_for_design(design)
    for name in design.kernels:
        assert repo.get_kernel(name) == design.kernels[name]
