"""Topology expansion, selectors, and resource accounting."""

import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ea4rca.model import (
    Butterfly,
    Cascade,
    DesignSpec,
    Parallel,
    PlatformSpec,
    Single,
    chain_groups,
    core_count,
    expand_cores,
    parallel_depth,
    plio_count,
    pu_core_count,
    pu_input_reuse,
    resolve_platform,
    resource_report,
    selector_format,
    selector_parse,
)
from ea4rca.model import DacSpec, DccSpec, PstSpec, PuSpec, XferMode
from ea4rca.workloads import template_design


def leaf_ccs():
    return st.one_of(
        st.builds(Single, st.just("k")),
        st.builds(Cascade, st.integers(2, 6), st.just("k")),
        st.builds(Butterfly, st.integers(2, 6), st.just(("k",))),
    )


def nested_ccs():
    return st.one_of(leaf_ccs(), st.builds(Parallel, st.integers(2, 5), leaf_ccs()))


@given(nested_ccs())
def test_core_count_matches_expansion(cc):
    sites = expand_cores(cc)
    assert core_count(cc) == len(sites)
    assert [s.index for s in sites] == list(range(len(sites)))


@given(st.integers(2, 16), st.integers(2, 16), leaf_ccs())
def test_core_count_strictly_monotone(n, k, inner):
    assert core_count(Cascade(n + 1, "k")) > core_count(Cascade(n, "k"))
    assert core_count(Butterfly(n + 1, ("k",))) > core_count(Butterfly(n, ("k",)))
    assert core_count(Parallel(k + 1, inner)) > core_count(Parallel(k, inner))


def test_expansion_layout():
    cc = Parallel(3, Cascade(4, "kB"))
    sites = expand_cores(cc)
    assert len(sites) == 12
    groups = chain_groups(cc)
    assert [len(g) for g in groups] == [4, 4, 4]
    for g in groups:
        assert [s.chain_pos for s in g] == [0, 1, 2, 3]
        assert all(s.chain_len == 4 and s.kind == "cascade" for s in g)
    # branches laid out consecutively in depth-first order
    assert [s.index for s in groups[1]] == [4, 5, 6, 7]
    assert parallel_depth(cc) == 1
    assert parallel_depth(Parallel(2, Parallel(2, Single("k")))) == 2


def test_butterfly_stage_kernels_cycle():
    sites = expand_cores(Butterfly(4, ("a", "b")))
    assert [s.kernel for s in sites] == ["a", "b", "a", "b"]
    assert all(s.chain_id == 0 for s in sites)


@given(st.sets(st.integers(0, 511), min_size=1, max_size=64))
def test_selector_round_trip(serves):
    text = selector_format(serves)
    assert selector_parse(text, 512) == tuple(sorted(serves))


def test_selector_forms():
    assert selector_parse("all", 5) == (0, 1, 2, 3, 4)
    assert selector_parse("0,4,8", 16) == (0, 4, 8)
    assert selector_parse("0-3,7", 16) == (0, 1, 2, 3, 7)
    assert selector_format([0, 1, 2, 5]) == "0-2,5"
    assert selector_format([3]) == "3"
    for bad in ("3-1", "1,1", "1,,2"):
        with pytest.raises(ValueError):
            selector_parse(bad, 16)


def test_dca_connectors_occupy_cores():
    base = PstSpec(
        dacs=(DacSpec(XferMode.DIR, (0,)),),
        cc=Single("k"),
        dccs=(DccSpec(XferMode.DIR, (0,)),),
    )
    pu = PuSpec(name="p", psts=(base,))
    assert pu_core_count(pu) == 1
    with_dca = dataclasses.replace(
        base,
        dacs=(DacSpec(XferMode.DCA, (0,), dca_kernel="k"),),
        dccs=(DccSpec(XferMode.DCA, (0,), dca_kernel="k"),),
    )
    assert pu_core_count(PuSpec(name="p", psts=(with_dca,))) == 3


def test_plio_endpoints_skip_interior_stages():
    stage = PstSpec(
        dacs=(DacSpec(XferMode.DIR, (0,), plio_ports=2),),
        cc=Single("k"),
        dccs=(DccSpec(XferMode.DIR, (0,), plio_ports=3),),
    )
    pu = PuSpec(name="p", psts=(stage, stage))
    assert plio_count(pu) == (2, 3)


def test_input_reuse_weighting():
    mm = template_design("mm")
    assert pu_input_reuse(mm.pus[0]) == pytest.approx(4.0)
    plain = PstSpec(
        dacs=(DacSpec(XferMode.SWH, (0,)),), cc=Single("k"), dccs=(DccSpec(XferMode.SWH, (0,)),)
    )
    assert pu_input_reuse(PuSpec(name="p", psts=(plain,))) == 1.0
    mixed = PstSpec(
        dacs=(
            DacSpec(XferMode.BDC, (0, 1, 2, 3), reuse_factor=4),
            DacSpec(XferMode.SWH, (0, 1, 2, 3)),
        ),
        cc=Parallel(4, Single("k")),
        dccs=(DccSpec(XferMode.SWH, (0, 1, 2, 3)),),
    )
    assert pu_input_reuse(PuSpec(name="p", psts=(mixed,))) == pytest.approx(1.6)


def test_template_resource_totals():
    cases = {
        "mm": (384, 6, 1),
        "filter2d": (352, 44, 11),
        "fft": (80, 8, 8),
        "mmt": (400, 50, 50),
    }
    for app, (cores, n_pu, n_du) in cases.items():
        d = template_design(app)
        rep = resource_report(d)
        assert rep.aie_cores_used == cores, app
        assert len(rep.per_pu) == n_pu and len(rep.per_du) == n_du, app
        assert rep.over_budget == (), app
    mm_rep = resource_report(template_design("mm"))
    assert mm_rep.plio_in_used + mm_rep.plio_out_used == 72
    assert mm_rep.aie_core_fraction == pytest.approx(0.96)


def _prefixed(design: DesignSpec, tag: str) -> DesignSpec:
    def fix_cc(cc):
        if isinstance(cc, Single):
            return Single(tag + cc.kernel)
        if isinstance(cc, Cascade):
            return Cascade(cc.n, tag + cc.kernel)
        if isinstance(cc, Parallel):
            return Parallel(cc.k, fix_cc(cc.inner))
        return Butterfly(cc.cores, tuple(tag + k for k in cc.stage_kernels))

    def fix_conn(c):
        if c.dca_kernel is None:
            return c
        return dataclasses.replace(c, dca_kernel=tag + c.dca_kernel)

    kernels = {
        tag + name: dataclasses.replace(spec, name=tag + spec.name)
        for name, spec in design.kernels.items()
    }
    pus = tuple(
        dataclasses.replace(
            pu,
            name=tag + pu.name,
            psts=tuple(
                PstSpec(
                    dacs=tuple(fix_conn(d) for d in pst.dacs),
                    cc=fix_cc(pst.cc),
                    dccs=tuple(fix_conn(d) for d in pst.dccs),
                )
                for pst in pu.psts
            ),
        )
        for pu in design.pus
    )
    dus = tuple(dataclasses.replace(du, name=tag + du.name) for du in design.dus)
    pairings = {
        tag + du: tuple(tag + pu for pu in served) for du, served in design.pairings.items()
    }
    return DesignSpec(kernels=kernels, pus=pus, dus=dus, pairings=pairings)


def test_resource_report_additive_over_disjoint_union():
    wide = PlatformSpec(aie_core_count=4000, plio_count=4000)
    for left_app, right_app in [("mm", "fft"), ("filter2d", "mmt"), ("mm", "mm")]:
        a = _prefixed(template_design(left_app), "a_")
        b = _prefixed(template_design(right_app), "b_")
        union = DesignSpec(
            kernels={**a.kernels, **b.kernels},
            pus=a.pus + b.pus,
            dus=a.dus + b.dus,
            pairings={**a.pairings, **b.pairings},
        )
        ra, rb, ru = (resource_report(d, wide) for d in (a, b, union))
        assert ru.aie_cores_used == ra.aie_cores_used + rb.aie_cores_used
        assert ru.plio_in_used == ra.plio_in_used + rb.plio_in_used
        assert ru.plio_out_used == ra.plio_out_used + rb.plio_out_used
        assert ru.uram_bytes_used == ra.uram_bytes_used + rb.uram_bytes_used
        assert ru.per_pu == {**ra.per_pu, **rb.per_pu}
        assert ru.per_du == {**ra.per_du, **rb.per_du}


def test_platform_resolution():
    plat = PlatformSpec()
    assert plat.plio_bytes_per_sec() == pytest.approx(128 / 8 * 300e6)
    assert plat.ddr_port_bytes_per_sec() == pytest.approx(512 / 8 * 300e6)
    d = DesignSpec(platform_override={"aie_core_count": 64})
    resolved = resolve_platform(d, None)
    assert resolved.aie_core_count == 64
    # resolving against an explicit platform is idempotent
    assert resolve_platform(d, resolved) == resolved
    with pytest.raises(KeyError):
        resolve_platform(DesignSpec(platform_override={"bogus_field": 1}), None)
