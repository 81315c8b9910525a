"""Module repository loading: ``<root>/<Module>/<version>/<Module>.vl``."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .parser import ParseError, parse_module
from .surface import SurfaceModule
from .version_algebra import ModuleRegistry, VersionError, version_key


class LoadError(Exception):
    pass


class MissingModuleVersion(LoadError):
    pass


class ImportCycle(LoadError):
    def __init__(self, cycle: list[str]):
        super().__init__("import cycle: " + " -> ".join(cycle))
        self.cycle = cycle


@dataclass
class Repository:
    registry: ModuleRegistry
    modules: dict[tuple[str, str], SurfaceModule] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)

    def module(self, name: str, version: str) -> SurfaceModule:
        return self.modules[(name, version)]

    def versions(self, name: str) -> list[SurfaceModule]:
        return [self.modules[(name, v)] for v in self.registry.versions(name)]

    def imports_of(self, name: str) -> list[str]:
        seen: list[str] = []
        for m in self.versions(name):
            for imp in m.imports:
                if imp not in seen:
                    seen.append(imp)
        return seen

    def transitive_imports(self, name: str) -> list[str]:
        """``name`` and everything it reaches, in topological order."""
        reach: set[str] = set()
        stack = [name]
        while stack:
            cur = stack.pop()
            if cur in reach:
                continue
            reach.add(cur)
            stack.extend(self.imports_of(cur))
        return [m for m in self.order if m in reach]


def discover_registry(roots: Iterable[Path | str]) -> ModuleRegistry:
    """Build a registry from the directory tree under one or more roots."""
    found: dict[str, list[str]] = {}
    for root in roots:
        root = Path(root)
        if not root.is_dir():
            raise LoadError(f"module path {root} is not a directory")
        for mod_dir in sorted(p for p in root.iterdir() if p.is_dir()):
            for ver_dir in sorted(p for p in mod_dir.iterdir() if p.is_dir()):
                if (ver_dir / f"{mod_dir.name}.vl").is_file():
                    try:
                        version_key(ver_dir.name)
                    except VersionError:
                        continue
                    versions = found.setdefault(mod_dir.name, [])
                    if ver_dir.name not in versions:
                        versions.append(ver_dir.name)
    return ModuleRegistry(found)


def _locate(roots: list[Path], name: str, version: str) -> Path:
    for root in roots:
        path = root / name / version / f"{name}.vl"
        if path.is_file():
            return path
    raise MissingModuleVersion(f"no source for {name} {version} under {', '.join(map(str, roots))}")


def topological_order(graph: dict[str, list[str]]) -> list[str]:
    """Dependencies first; ties broken by name.  Raises ImportCycle."""
    order: list[str] = []
    state: dict[str, int] = {}

    def visit(node: str, path: list[str]) -> None:
        state[node] = 1
        for dep in sorted(graph.get(node, [])):
            if state.get(dep) == 1:
                raise ImportCycle(path[path.index(dep):] + [dep])
            if dep not in state:
                visit(dep, path + [dep])
        state[node] = 2
        order.append(node)

    for node in sorted(graph):
        if node not in state:
            visit(node, [node])
    return order


def load_repository(roots: Path | str | Iterable[Path | str], reg: ModuleRegistry | None = None) -> Repository:
    if isinstance(roots, (str, Path)):
        roots = [roots]
    roots = [Path(r) for r in roots]
    if reg is None:
        reg = discover_registry(roots)
    repo = Repository(reg)
    for name in reg.module_names():
        for version in reg.versions(name):
            path = _locate(roots, name, version)
            try:
                source = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise LoadError(f"cannot read {path}: {exc}") from exc
            try:
                module = parse_module(source, str(path))
            except ParseError as exc:
                if exc.span is not None and exc.span.path is None:
                    exc.span = type(exc.span)(exc.span.start, exc.span.end, str(path))
                raise
            if module.name != name:
                raise LoadError(f"{path} declares module {module.name}, expected {name}")
            repo.modules[(name, version)] = SurfaceModule(
                module.name, module.imports, module.defs, version=version, path=str(path)
            )
    graph = {name: repo.imports_of(name) for name in reg.module_names()}
    for name, deps in graph.items():
        for dep in deps:
            if dep not in reg:
                raise MissingModuleVersion(f"{name} imports unknown module {dep}")
    repo.order = topological_order(graph)
    return repo


def repository_from_sources(sources: dict[tuple[str, str], str]) -> Repository:
    """Build a repository from in-memory sources keyed by (module, version)."""
    found: dict[str, list[str]] = {}
    for name, version in sources:
        found.setdefault(name, []).append(version)
    repo = Repository(ModuleRegistry(found))
    for (name, version), source in sources.items():
        module = parse_module(source, f"<{name} {version}>")
        if module.name != name:
            raise LoadError(f"source for {name} {version} declares module {module.name}")
        repo.modules[(name, version)] = SurfaceModule(module.name, module.imports, module.defs, version=version)
    graph = {name: repo.imports_of(name) for name in repo.registry.module_names()}
    for name, deps in graph.items():
        for dep in deps:
            if dep not in repo.registry:
                raise MissingModuleVersion(f"{name} imports unknown module {dep}")
    repo.order = topological_order(graph)
    return repo
