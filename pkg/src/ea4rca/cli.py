"""Command-line driver: validate, generate, simulate, calibrate, report, serve.

Exit codes: 0 ok, 2 structurally invalid design, 3 over a platform
budget, 4 infeasible design/workload mapping, 1 anything else. User
errors render as diagnostics, never as tracebacks.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .configio import ConfigParseError, load_design, serialize_design
from .graphir import build_ir, emit_graph_source
from .model import DesignSpec
from .repo import repo_for_design
from .sim import (
    CostModel,
    InfeasibleMapping,
    SimResult,
    Underdetermined,
    calibrate,
    simulate,
)
from .validate import _OVER_CODES, validate_design
from .workloads import TemplateParams, UnknownApp, parse_size, template_design

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_STRUCTURAL = 2
EXIT_BUDGET = 3
EXIT_INFEASIBLE = 4

OUTPUT_FORMAT_VERSION = "1.0"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_OTHER):
        super().__init__(message)
        self.code = code


def _read_design(path: str) -> DesignSpec:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {path}")
    return load_design(p).design


def _validation_exit(report) -> int:
    if report.is_deployable:
        return EXIT_OK
    over = set(_OVER_CODES.values())
    if any(d.code not in over for d in report.errors):
        return EXIT_STRUCTURAL
    return EXIT_BUDGET


def _infer_app(design: DesignSpec) -> Optional[str]:
    """Guess the application family from kernel names (template lineage)."""

    names = set(design.kernels)
    if any(n.startswith("fft") for n in names):
        return "fft"
    if "filter2d" in names:
        return "filter2d"
    if "mm32_cascade" in names:
        return "mmt"
    if "mm32" in names:
        return "mm"
    return None


def _cmd_validate(args) -> int:
    design = _read_design(args.design)
    report = validate_design(design)
    print(report.render())
    return _validation_exit(report)


def _cmd_generate(args) -> int:
    design = _read_design(args.design)
    report = validate_design(design)
    code = _validation_exit(report)
    if code != EXIT_OK:
        print(report.render(), file=sys.stderr)
        return code
    name = Path(args.design).name.split(".")[0]
    ir = build_ir(design, name=name)
    files = emit_graph_source(ir, repo_for_design(design))
    out = Path(args.out)
    for rel, text in sorted(files.items()):
        dest = out / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
    print(f"wrote {len(files)} file(s) under {out}")
    return EXIT_OK


def _load_cost_model(path: Optional[str]) -> Optional[CostModel]:
    if path is None:
        return None
    data = json.loads(Path(path).read_text())
    return CostModel.from_data(data.get("cost_model", data))


def _cmd_simulate(args) -> int:
    design = _read_design(args.design)
    app = args.workload or _infer_app(design)
    if app is None:
        raise CliError("cannot infer the workload family; pass --workload")
    if app.lower().replace("-", "").replace("_", "") != "mmt" and not args.size:
        raise CliError(f"--size is required for {app} workloads")
    workload = parse_size(app, args.size or "")
    if args.pus is not None:
        design = template_design(app, TemplateParams(pu_count=args.pus))
    result = simulate(
        design,
        workload,
        cost_model=_load_cost_model(args.cost_model),
        trace=args.trace,
    )
    payload = {
        "format_version": OUTPUT_FORMAT_VERSION,
        "workload": {"app": app, "size": args.size or ""},
        **result.to_data(),
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    raw = json.loads(Path(args.targets).read_text())
    entries = raw.get("targets", raw)
    if isinstance(entries, dict):
        targets = sorted(entries.items())
    else:
        targets = [(name, value) for name, value in entries]
    try:
        fit = calibrate(targets)
    except Underdetermined as e:
        raise CliError(str(e))
    payload = {
        "format_version": OUTPUT_FORMAT_VERSION,
        "cost_model": fit.model.to_data(),
        "residuals": fit.residuals,
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _fmt_seconds(s: float) -> str:
    if s >= 1.0:
        return f"{s:.3f} s"
    if s >= 1e-3:
        return f"{s * 1e3:.3f} ms"
    return f"{s * 1e6:.3f} us"


def _cmd_report(args) -> int:
    rows: List[Dict[str, str]] = []
    first_trace = None
    for path in args.results:
        data = json.loads(Path(path).read_text())
        gops = data.get("ops_per_sec")
        ph = data.get("phases", {})
        total = data["total_time_s"]
        rows.append(
            {
                "result": Path(path).name,
                "time": _fmt_seconds(total),
                "tasks/sec": f"{data['tasks_per_sec']:.4g}",
                "gops": f"{gops / 1e9:.2f}" if gops else "-",
                "comm": f"{ph.get('comm_s', 0) / total:.1%}",
                "compute": f"{ph.get('compute_s', 0) / total:.1%}",
                "prefetch": f"{(ph.get('prefetch_exposed_s', 0) + ph.get('prefetch_overlapped_s', 0)) / total:.1%}",
            }
        )
        if first_trace is None and data.get("trace"):
            first_trace = (Path(path).name, data["trace"])
    cols = ["result", "time", "tasks/sec", "gops", "comm", "compute", "prefetch"]
    widths = {c: max(len(c), *(len(r[c]) for r in rows)) for c in cols}
    header = "  ".join(c.ljust(widths[c]) for c in cols)
    print(header)
    print("-" * len(header))
    for r in rows:
        print("  ".join(r[c].ljust(widths[c]) for c in cols))
    if args.gantt:
        if first_trace is None:
            raise CliError("no event trace in the given results; rerun simulate with --trace")
        _write_gantt(first_trace[0], first_trace[1], args.gantt)
        print(f"wrote {args.gantt}")
    return EXIT_OK


def _write_gantt(title: str, trace: Sequence[Sequence], path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    lanes: Dict[str, List] = {}
    for ts, dur, resource, phase, pair in trace:
        lanes.setdefault(f"{pair}/{resource}", []).append((ts / 1e6, dur / 1e6, phase))
    colors = {"comm": "tab:blue", "compute": "tab:orange", "prefetch": "tab:green", "fill": "tab:red"}
    fig, ax = plt.subplots(figsize=(10, 0.5 * len(lanes) + 1.5))
    for y, (lane, spans) in enumerate(sorted(lanes.items())):
        for start, dur, phase in spans:
            ax.broken_barh([(start, dur)], (y - 0.4, 0.8), color=colors.get(phase, "grey"))
    ax.set_yticks(range(len(lanes)))
    ax.set_yticklabels(sorted(lanes))
    ax.set_xlabel("time (us)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _cmd_template(args) -> int:
    params = TemplateParams(pu_count=args.pus, du_count=args.dus)
    design = template_design(args.app, params)
    text = serialize_design(design)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(cors_origins=tuple(args.cors or ()))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ea4rca",
        description="Design toolkit for DU/PU accelerator configurations.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="command")

    p = sub.add_parser("validate", help="check a design file and print the findings")
    p.add_argument("design", help="path to a .ea4rca.json design")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("generate", help="emit dataflow graph sources for a design")
    p.add_argument("design", help="path to a .ea4rca.json design")
    p.add_argument("--out", default="build", help="output directory (default: build)")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("simulate", help="predict workload timing on a design")
    p.add_argument("design", help="path to a .ea4rca.json design")
    p.add_argument("--workload", help="application family: mm, filter2d, fft, mmt")
    p.add_argument("--size", help='workload size: "MxKxN", "WxH:k", or samples')
    p.add_argument("--pus", type=int, help="rebuild the matching template with this many PUs")
    p.add_argument("--cost-model", help="JSON file with calibrated cost-model parameters")
    p.add_argument("--trace", action="store_true", help="include the event trace in the output")
    p.add_argument("--out", help="write the result JSON here instead of stdout")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("calibrate", help="fit cost-model parameters to measured targets")
    p.add_argument("targets", help='JSON file: {"targets": {"method1": seconds, ...}}')
    p.add_argument("--out", help="write the fitted model JSON here instead of stdout")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("report", help="tabulate one or more simulate results")
    p.add_argument("results", nargs="+", help="simulate output JSON files")
    p.add_argument("--gantt", help="also render the first trace as a timeline PNG")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("template", help="write a shipped application template")
    p.add_argument("app", help="mm, filter2d, fft, or mmt")
    p.add_argument("--pus", type=int, help="processing unit count override")
    p.add_argument("--dus", type=int, help="data unit count override")
    p.add_argument("--out", help="write the design here instead of stdout")
    p.set_defaults(func=_cmd_template)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--cors", action="append", help="allowed CORS origin (repeatable)")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except ConfigParseError as e:
        for d in e.diagnostics:
            print(d.render(), file=sys.stderr)
        return EXIT_STRUCTURAL
    except InfeasibleMapping as e:
        print(f"infeasible mapping: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UnknownApp, ValueError, json.JSONDecodeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
