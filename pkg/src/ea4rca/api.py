"""HTTP facade over the design library.

Endpoints mirror the library one-to-one: validate, generate, and
simulate run pure functions on the posted document; the kernel and
graph repositories are the same stores the generator uses. Errors
come back as problem documents {code, message, location}, with the
full diagnostic list attached where one exists.
"""

from __future__ import annotations

import itertools
import os
import threading
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .configio import ConfigDocument, decode_design, document_to_data
from .graphir import (
    CombinedOverBudget,
    IdCollision,
    build_ir,
    check_ir,
    emit_graph_source,
    fuse,
    ir_to_data,
    structural_signature,
)
from .model import DesignSpec, PlatformSpec, resource_report
from .repo import (
    GraphRepository,
    KernelRepository,
    NotFound,
    kernel_from_data,
    kernel_to_data,
    repo_for_design,
)
from .sim import (
    CostModel,
    InfeasibleMapping,
    Underdetermined,
    calibrate,
    simulate,
)
from .validate import validate_design
from .workloads import TemplateParams, UnknownApp, parse_size, template_design

SYNC_SIMULATE_BUDGET_S = 2.0


def _problem(
    status: int,
    code: str,
    message: str,
    location: str = "$",
    diagnostics: Optional[Sequence] = None,
) -> JSONResponse:
    body: Dict[str, object] = {"code": code, "message": message, "location": location}
    if diagnostics is not None:
        body["diagnostics"] = [
            {
                "code": d.code,
                "path": d.path,
                "message": d.message,
                "severity": d.severity.value,
            }
            for d in diagnostics
        ]
    return JSONResponse(status_code=status, content=body)


def _report_data(report) -> Dict[str, object]:
    return {
        "deployable": report.is_deployable,
        "diagnostics": [
            {
                "code": d.code,
                "path": d.path,
                "message": d.message,
                "severity": d.severity.value,
            }
            for d in report.diagnostics
        ],
        "resource": {
            "aie_cores_used": report.resource.aie_cores_used,
            "plio_in_used": report.resource.plio_in_used,
            "plio_out_used": report.resource.plio_out_used,
            "uram_bytes_used": report.resource.uram_bytes_used,
            "aie_core_fraction": report.resource.aie_core_fraction,
            "plio_in_fraction": report.resource.plio_in_fraction,
            "plio_out_fraction": report.resource.plio_out_fraction,
            "uram_fraction": report.resource.uram_fraction,
            "over_budget": list(report.resource.over_budget),
        },
        "summary": report.render().splitlines()[-1],
    }


def _decode_or_problem(data: object) -> Tuple[Optional[ConfigDocument], Optional[JSONResponse]]:
    doc, report = decode_design(data)
    if doc is None:
        return None, _problem(
            400, "BAD_DOCUMENT", "design document could not be decoded",
            diagnostics=report.diagnostics,
        )
    return doc, None


class WorkloadBody(BaseModel):
    app: str
    size: str = ""


class SimulateBody(BaseModel):
    design: dict
    workload: WorkloadBody
    platform: Optional[dict] = None
    cost_model: Optional[dict] = None


class KernelBody(BaseModel):
    name: str
    source_ref: str = ""
    in_ports: List[int]  # [stream, cascade, dma]
    out_ports: List[int]
    cycles_per_invocation: int = 0
    local_mem_bytes: int = 0
    source_text: Optional[str] = None


class GraphBody(BaseModel):
    name: str
    design: dict


class FuseBody(BaseModel):
    addition: str  # name of a stored graph to splice in
    prefix: str
    save_as: Optional[str] = None


class CalibrateBody(BaseModel):
    targets: Dict[str, float]


def create_app(
    repo_root: Optional[str] = None,
    cors_origins: Optional[Sequence[str]] = None,
) -> FastAPI:
    """Build the service; ``repo_root=None`` keeps repositories in memory."""

    if repo_root is None:
        repo_root = os.environ.get("EA4RCA_REPO_ROOT") or None
    if cors_origins is None:
        cors_origins = tuple(
            o for o in os.environ.get("EA4RCA_CORS", "").split(",") if o
        )

    app = FastAPI(title="ea4rca design service", version=__version__)
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    kernels = KernelRepository(Path(repo_root, "kernels") if repo_root else None)
    graphs = GraphRepository(Path(repo_root, "graphs") if repo_root else None)
    jobs: Dict[str, Dict[str, object]] = {}
    job_ids = itertools.count(1)
    jobs_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def _schema_errors(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = ".".join(str(p) for p in first.get("loc", ()))
        return _problem(400, "SCHEMA", first.get("msg", "invalid request body"), loc or "$")

    @app.post("/v1/validate")
    def validate_endpoint(body: dict):
        doc, err = _decode_or_problem(body)
        if err is not None:
            return err
        return _report_data(validate_design(doc.design))

    @app.post("/v1/generate")
    def generate_endpoint(body: dict, name: str = Query("design")):
        doc, err = _decode_or_problem(body)
        if err is not None:
            return err
        report = validate_design(doc.design)
        if not report.is_deployable:
            return _problem(
                422, "NOT_DEPLOYABLE", "design must be deployable before generation",
                diagnostics=report.diagnostics,
            )
        ir = build_ir(doc.design, name=name)
        files = emit_graph_source(ir, repo_for_design(doc.design))
        return {"files": files, "signature": structural_signature(ir)}

    def _run_simulation(body: SimulateBody):
        doc, err = _decode_or_problem(body.design)
        if err is not None:
            return None, err
        try:
            workload = parse_size(body.workload.app, body.workload.size)
        except (UnknownApp, ValueError) as e:
            return None, _problem(400, "BAD_WORKLOAD", str(e), "$.workload")
        platform = PlatformSpec().with_overrides(body.platform or {})
        cm = CostModel.from_data(body.cost_model) if body.cost_model else None
        result = simulate(doc.design, workload, platform=platform, cost_model=cm, trace=True)
        return result.to_data(), None

    @app.post("/v1/simulate")
    def simulate_endpoint(body: SimulateBody):
        state: Dict[str, object] = {"status": "running"}
        done = threading.Event()

        def work():
            try:
                result, err = _run_simulation(body)
                if err is not None:
                    state.update(status="rejected", problem=err)
                else:
                    state.update(status="done", result=result)
            except InfeasibleMapping as e:
                state.update(
                    status="rejected",
                    problem=_problem(
                        422, "INFEASIBLE_MAPPING", str(e), "$.workload",
                        diagnostics=getattr(e, "diagnostics", ()),
                    ),
                )
            except Exception as e:  # surface, never hang the poller
                state.update(status="error", message=str(e))
            finally:
                done.set()

        threading.Thread(target=work, daemon=True).start()
        if done.wait(SYNC_SIMULATE_BUDGET_S):
            return _finish_job(state)
        token = f"job-{next(job_ids)}"
        with jobs_lock:
            jobs[token] = state
        return JSONResponse(
            status_code=202,
            content={"token": token, "status_url": f"/v1/simulate/{token}"},
        )

    def _finish_job(state: Dict[str, object]):
        if state["status"] == "done":
            return state["result"]
        if state["status"] == "rejected":
            return state["problem"]
        return _problem(500, "SIMULATION_FAILED", str(state.get("message", "unknown")))

    @app.get("/v1/simulate/{token}")
    def poll_endpoint(token: str):
        with jobs_lock:
            state = jobs.get(token)
        if state is None:
            return _problem(404, "UNKNOWN_JOB", f"no simulation job {token!r}")
        if state["status"] == "running":
            return JSONResponse(status_code=202, content={"status": "running"})
        return _finish_job(state)

    @app.get("/v1/kernels")
    def list_kernels_endpoint():
        out = []
        for name in kernels.list_kernels():
            spec = kernels.load_kernel(name)
            out.append({**kernel_to_data(spec), "revision": kernels.revision_of(name)})
        return {"kernels": out}

    @app.post("/v1/kernels")
    def register_kernel_endpoint(body: KernelBody):
        data = body.model_dump()
        source_text = data.pop("source_text")
        try:
            spec = kernel_from_data(data)
        except (KeyError, TypeError, ValueError) as e:
            return _problem(400, "BAD_KERNEL", str(e))
        rev = kernels.register_kernel(spec, source_text)
        return {"name": spec.name, "revision": rev}

    @app.get("/v1/graphs")
    def list_graphs_endpoint():
        return {
            "graphs": [
                {"name": name, "revision": graphs.revision_of(name)}
                for name in graphs.list_graphs()
            ]
        }

    @app.post("/v1/graphs")
    def save_graph_endpoint(body: GraphBody):
        doc, err = _decode_or_problem(body.design)
        if err is not None:
            return err
        report = validate_design(doc.design)
        if not report.is_deployable:
            return _problem(
                422, "NOT_DEPLOYABLE", "design must be deployable before storing its graph",
                diagnostics=report.diagnostics,
            )
        ir = build_ir(doc.design, name=body.name)
        try:
            existing = graphs.load_graph(body.name)
        except NotFound:
            existing = None
        if existing is not None:
            # content addressing makes identical re-posts idempotent; a
            # different structure under the same name is a conflict
            if structural_signature(existing.ir) != structural_signature(ir):
                return _problem(
                    409, "GRAPH_CONFLICT",
                    f"graph {body.name!r} already stores a different structure",
                )
            return {"name": body.name, "revision": graphs.revision_of(body.name)}
        rev = graphs.save_graph(body.name, ir, provenance={"source": "api"})
        return {"name": body.name, "revision": rev}

    @app.post("/v1/graphs/{name}/fuse")
    def fuse_endpoint(name: str, body: FuseBody):
        try:
            base = graphs.load_graph(name)
        except NotFound:
            return _problem(404, "UNKNOWN_GRAPH", f"no graph named {name!r}")
        try:
            addition = graphs.load_graph(body.addition)
        except NotFound:
            return _problem(404, "UNKNOWN_GRAPH", f"no graph named {body.addition!r}")
        try:
            combined = fuse(base.ir, addition.ir, body.prefix, platform=PlatformSpec())
        except IdCollision as e:
            return _problem(409, "ID_COLLISION", str(e))
        except CombinedOverBudget as e:
            return _problem(422, "OVER_BUDGET", str(e))
        payload = {
            "nodes": len(combined.nodes),
            "plios": len(combined.plios),
            "edges": combined.edge_count(),
            "signature": structural_signature(combined),
        }
        if body.save_as:
            payload["name"] = body.save_as
            payload["revision"] = graphs.save_graph(
                body.save_as, combined,
                provenance={"base": name, "addition": body.addition},
            )
        return payload

    @app.get("/v1/templates/{app_name}")
    def template_endpoint(
        app_name: str,
        pus: Optional[int] = Query(None),
        dus: Optional[int] = Query(None),
    ):
        try:
            design = template_design(app_name, TemplateParams(pu_count=pus, du_count=dus))
        except (UnknownApp, ValueError) as e:
            return _problem(404, "UNKNOWN_TEMPLATE", str(e))
        return document_to_data(ConfigDocument(design))

    @app.post("/v1/calibrate")
    def calibrate_endpoint(body: CalibrateBody):
        try:
            fit = calibrate(sorted(body.targets.items()))
        except Underdetermined as e:
            return _problem(422, "UNDERDETERMINED", str(e))
        except ValueError as e:
            return _problem(400, "BAD_TARGETS", str(e))
        return {"cost_model": fit.model.to_data(), "residuals": fit.residuals}

    return app
