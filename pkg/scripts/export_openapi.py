#!/usr/bin/env python3
"""Write the service's OpenAPI description to docs/openapi.json."""

import json
from pathlib import Path

from ea4rca.api import create_app

DOCS = Path(__file__).resolve().parent.parent / "docs"


def main() -> None:
    DOCS.mkdir(exist_ok=True)
    spec = create_app().openapi()
    out = DOCS / "openapi.json"
    out.write_text(json.dumps(spec, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
