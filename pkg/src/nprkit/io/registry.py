"""Extension-keyed loader registry."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

from ..errors import NoLoader
from .md2 import load_md2
from .obj import load_obj
from .skin import load_skin

KINDS = ("static", "vertex-animated", "skinned")


@dataclass(frozen=True)
class Loader:
    extension: str
    kind: str
    load: Callable

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"loader kind must be one of {KINDS}")


class LoaderRegistry:
    """One loader per lower-case file extension (with the leading dot)."""

    def __init__(self):
        self._loaders: dict[str, Loader] = {}

    def register(self, extension: str, kind: str, load: Callable, replace: bool = False) -> None:
        ext = extension.lower() if extension.startswith(".") else "." + extension.lower()
        if ext in self._loaders and not replace:
            raise ValueError(f"a loader for {ext} is already registered")
        self._loaders[ext] = Loader(ext, kind, load)

    def loader_for(self, path) -> Loader:
        ext = os.path.splitext(os.fspath(path))[1].lower()
        try:
            return self._loaders[ext]
        except KeyError:
            raise NoLoader(f"no loader for extension {ext or '(none)'!r}") from None

    def load(self, path):
        return self.loader_for(path).load(path)

    def kind_of(self, path) -> str:
        return self.loader_for(path).kind

    @property
    def extensions(self) -> list[str]:
        return sorted(self._loaders)


def default_registry() -> LoaderRegistry:
    reg = LoaderRegistry()
    reg.register(".obj", "static", load_obj)
    reg.register(".md2", "vertex-animated", load_md2)
    reg.register(".zskin", "skinned", load_skin)
    reg.register(".json", "skinned", load_skin)
    return reg


def load(path):
    """Load any supported file by extension."""
    return default_registry().load(path)
