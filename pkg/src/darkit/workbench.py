"""Composition root: one data directory, all stores.

Both the API service and the CLI's local mode talk to a Workbench, which
owns the registry, the patchable model store, and the run tracker. Model
entries in the registry are materialized into the model store on first
access.
"""

from __future__ import annotations

import os

from .errors import NotFoundError
from .patch import ModelStore
from .registry import Registry
from .spikedef import SourceFile
from .tracker import RunStore

DEFAULT_DATA_DIR = "darkit-data"


def resolve_data_dir(flag_value: str | None = None) -> str:
    """Flag wins over DARKIT_DATA_DIR, which wins over the default."""
    if flag_value:
        return flag_value
    return os.environ.get("DARKIT_DATA_DIR", DEFAULT_DATA_DIR)


class Workbench:
    def __init__(self, data_dir: str, seed: bool = True,
                 heartbeat_seconds: float = 15.0):
        self.data_dir = str(data_dir)
        os.makedirs(self.data_dir, exist_ok=True)
        self.registry = Registry(self.data_dir)
        if seed:
            self.registry.seed_builtin()
        self.models = ModelStore(self.data_dir)
        self.runs = RunStore(self.data_dir, heartbeat_seconds=heartbeat_seconds)

    def model_tree(self, name: str):
        """Model tree by name, materializing registry model entries."""
        if not self.models.has(name):
            entry = self.registry.get(name, "model")
            sources = [f for f in entry.files if f["path"].endswith(".sd")]
            if not sources:
                raise NotFoundError(f"model entry {name!r} bundles no .sd source")
            path = self.registry.entry_file_path(entry, sources[0]["path"])
            with open(path, encoding="utf-8") as fh:
                self.models.register(name, SourceFile.from_text(fh.read(), path=path))
        return self.models.tree(name)

    def params_schema(self, model: str):
        entry = self.registry.get(model, "model")
        return list(entry.params_schema or ())
