"""Content-addressed kernel and graph repositories.

Objects are stored as canonical JSON under ``objects/<sha256>.json`` with
a name index alongside; a repository created without a root directory
keeps everything in memory. Revisions are immutable: saving the same
content twice yields the same id, and a rename never rewrites an object.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .graphir import GraphIr, StoredGraph, ir_from_data, ir_to_data
from .model import KernelSpec, PortCounts


class NotFound(Exception):
    pass


def _canon(data) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _digest(data) -> str:
    return hashlib.sha256(_canon(data)).hexdigest()


def kernel_to_data(spec: KernelSpec, source_text: Optional[str] = None) -> Dict[str, object]:
    d = {
        "name": spec.name,
        "source_ref": spec.source_ref,
        "in_ports": [spec.in_ports.stream, spec.in_ports.cascade, spec.in_ports.dma],
        "out_ports": [spec.out_ports.stream, spec.out_ports.cascade, spec.out_ports.dma],
        "cycles_per_invocation": spec.cycles_per_invocation,
        "local_mem_bytes": spec.local_mem_bytes,
    }
    if source_text is not None:
        d["source_text"] = source_text
    return d


def kernel_from_data(data: Dict[str, object]) -> KernelSpec:
    return KernelSpec(
        name=data["name"],
        source_ref=data["source_ref"],
        in_ports=PortCounts(*data["in_ports"]),
        out_ports=PortCounts(*data["out_ports"]),
        cycles_per_invocation=data["cycles_per_invocation"],
        local_mem_bytes=data["local_mem_bytes"],
    )


class _ObjectStore:
    """Shared storage mechanics for both repository kinds."""

    def __init__(self, root: Optional[os.PathLike] = None):
        self.root = Path(root) if root is not None else None
        self._mem_objects: Dict[str, object] = {}
        self._mem_index: Dict[str, object] = {}
        if self.root is not None:
            (self.root / "objects").mkdir(parents=True, exist_ok=True)

    def _index_path(self) -> Path:
        return self.root / "index.json"

    def read_index(self) -> Dict[str, object]:
        if self.root is None:
            return self._mem_index
        try:
            with open(self._index_path(), "r", encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            return {}

    def write_index(self, index: Dict[str, object]) -> None:
        if self.root is None:
            self._mem_index = index
            return
        tmp = self._index_path().with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(index, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, self._index_path())

    def put_object(self, data) -> str:
        rev = _digest(data)
        if self.root is None:
            self._mem_objects[rev] = json.loads(_canon(data))
            return rev
        path = self.root / "objects" / f"{rev}.json"
        if not path.exists():
            tmp = path.with_suffix(".json.tmp")
            with open(tmp, "wb") as fh:
                fh.write(_canon(data))
            os.replace(tmp, path)
        return rev

    def get_object(self, rev: str):
        if self.root is None:
            if rev not in self._mem_objects:
                raise NotFound(f"no object {rev!r}")
            return self._mem_objects[rev]
        path = self.root / "objects" / f"{rev}.json"
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            raise NotFound(f"no object {rev!r}")


class KernelRepository:
    """Named, versioned kernel specs (with optional attached source text)."""

    def __init__(self, root: Optional[os.PathLike] = None):
        self._store = _ObjectStore(root)

    def register_kernel(self, spec: KernelSpec, source_text: Optional[str] = None) -> str:
        data = kernel_to_data(spec, source_text)
        rev = self._store.put_object(data)
        index = dict(self._store.read_index())
        index[spec.name] = rev
        self._store.write_index(index)
        return rev

    def get_kernel(self, ref: str) -> Optional[KernelSpec]:
        """Look up by name or revision id; None when absent."""

        try:
            return self.load_kernel(ref)
        except NotFound:
            return None

    def load_kernel(self, ref: str) -> KernelSpec:
        index = self._store.read_index()
        rev = index.get(ref, ref)
        return kernel_from_data(self._store.get_object(rev))

    def kernel_source(self, ref: str) -> Optional[str]:
        index = self._store.read_index()
        rev = index.get(ref, ref)
        return self._store.get_object(rev).get("source_text")

    def list_kernels(self) -> List[str]:
        return sorted(self._store.read_index())

    def revision_of(self, name: str) -> str:
        index = self._store.read_index()
        if name not in index:
            raise NotFound(f"no kernel named {name!r}")
        return index[name]


class GraphRepository:
    """Named, versioned stored graphs; revisions address the IR content."""

    def __init__(self, root: Optional[os.PathLike] = None):
        self._store = _ObjectStore(root)

    def save_graph(self, name: str, ir: GraphIr, provenance: Optional[Dict[str, str]] = None) -> str:
        data = ir_to_data(ir)
        rev = self._store.put_object(data)
        index = dict(self._store.read_index())
        index[name] = {"revision": rev, "provenance": dict(provenance or {})}
        self._store.write_index(index)
        return rev

    def load_graph(self, ref: str) -> StoredGraph:
        """Load by name or by revision id."""

        index = self._store.read_index()
        if ref in index:
            entry = index[ref]
            ir = ir_from_data(self._store.get_object(entry["revision"]))
            return StoredGraph(ref, ir, dict(entry["provenance"]))
        ir = ir_from_data(self._store.get_object(ref))
        return StoredGraph(ir.name, ir, {})

    def list_graphs(self) -> List[str]:
        return sorted(self._store.read_index())

    def revision_of(self, name: str) -> str:
        index = self._store.read_index()
        if name not in index:
            raise NotFound(f"no graph named {name!r}")
        return index[name]["revision"]


# Thin function forms, matching how the CLI and service call these.


def register_kernel(repo: KernelRepository, spec: KernelSpec, source_text: Optional[str] = None) -> str:
    return repo.register_kernel(spec, source_text)


def list_kernels(repo: KernelRepository) -> List[str]:
    return repo.list_kernels()


def save_graph(repo: GraphRepository, name: str, ir: GraphIr, provenance=None) -> str:
    return repo.save_graph(name, ir, provenance)


def load_graph(repo: GraphRepository, ref: str) -> StoredGraph:
    return repo.load_graph(ref)


def repo_for_design(design) -> KernelRepository:
    """In-memory kernel repository seeded with a design's declared kernels."""

    repo = KernelRepository()
    for name in sorted(design.kernels):
        repo.register_kernel(design.kernels[name])
    return repo
