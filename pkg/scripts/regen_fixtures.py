#!/usr/bin/env python3
"""Regenerate the checked-in fixture designs from the template factories.

Run from the repository root after changing a template; the fixtures are
plain serializer output, so diffs show exactly what moved.
"""

import json
from pathlib import Path

from ea4rca.configio import serialize_design
from ea4rca.workloads import template_design

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

APPS = ("mm", "filter2d", "fft", "mmt")

# Measured single-core transfer-method durations (seconds) used as
# calibration targets: interleaved stream, aggregated stream, core DMA.
COMM_METHOD_TARGETS = {
    "method1": 31.06e-6,
    "method2": 8.61e-6,
    "method3": 3.49e-6,
}


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    for app in APPS:
        path = FIXTURES / f"{app}.ea4rca.json"
        path.write_text(serialize_design(template_design(app)))
        print(f"wrote {path}")
    targets = FIXTURES / "comm_method_targets.json"
    targets.write_text(json.dumps({"targets": COMM_METHOD_TARGETS}, indent=2) + "\n")
    print(f"wrote {targets}")


if __name__ == "__main__":
    main()
