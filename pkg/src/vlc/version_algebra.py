"""Version labels, the module registry, and the resource semiring.

A version label assigns one version to every module of the active universe.
Resources grade types and assumptions: ``BOTTOM`` (unusable), a finite set of
labels, or a resource variable that only exists while inference is running.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union


class VersionError(Exception):
    pass


class VariableResource(VersionError):
    """A semiring operation was applied to an unsolved resource variable."""


class EmptyRegistry(VersionError):
    pass


_VERSION_RE = re.compile(r"^\d+(\.\d+)*$")


def version_key(version: str) -> tuple[int, ...]:
    if not _VERSION_RE.match(version):
        raise VersionError(f"malformed version {version!r}")
    return tuple(int(part) for part in version.split("."))


@dataclass(frozen=True, order=True)
class VersionLabel:
    """Total assignment module -> version, stored sorted by module name."""

    assignment: tuple[tuple[str, str], ...]

    @classmethod
    def of(cls, mapping: Mapping[str, str] | Iterable[tuple[str, str]]) -> VersionLabel:
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        return cls(tuple(sorted(items)))

    def __getitem__(self, module: str) -> str:
        for name, version in self.assignment:
            if name == module:
                return version
        raise KeyError(module)

    def get(self, module: str, default: str | None = None) -> str | None:
        try:
            return self[module]
        except KeyError:
            return default

    @property
    def modules(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.assignment)

    def as_dict(self) -> dict[str, str]:
        return dict(self.assignment)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{m}={v}" for m, v in self.assignment) + "}"


@dataclass
class ModuleRegistry:
    """Module name -> versions in ascending order."""

    modules: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, versions in self.modules.items():
            if not versions:
                raise VersionError(f"module {name} has no versions")
            if len(set(versions)) != len(versions):
                raise VersionError(f"module {name} lists a version twice")
            self.modules[name] = sorted(versions, key=version_key)

    def versions(self, module: str) -> list[str]:
        return self.modules[module]

    def index(self, module: str, version: str) -> int:
        return self.modules[module].index(version)

    def newest(self, module: str) -> str:
        return self.modules[module][-1]

    def __contains__(self, module: object) -> bool:
        return module in self.modules

    def module_names(self) -> list[str]:
        return sorted(self.modules)

    def restrict(self, names: Iterable[str]) -> ModuleRegistry:
        return ModuleRegistry({n: list(self.modules[n]) for n in names})

    def universe(self) -> list[VersionLabel]:
        return label_universe(self)


# -- resources ---------------------------------------------------------------


@dataclass(frozen=True)
class Bottom:
    def __str__(self) -> str:
        return "⊥"


@dataclass(frozen=True)
class Labels:
    labels: frozenset[VersionLabel] = frozenset()

    def __str__(self) -> str:
        if not self.labels:
            return "∅"
        return "{" + ", ".join(str(l) for l in sorted(self.labels)) + "}"


@dataclass(frozen=True)
class RVar:
    name: str

    def __str__(self) -> str:
        return self.name


Resource = Union[Bottom, Labels, RVar]

BOTTOM = Bottom()
UNIT = Labels(frozenset())


def labels(*ls: VersionLabel) -> Labels:
    return Labels(frozenset(ls))


def _ground(*rs: Resource) -> None:
    for r in rs:
        if isinstance(r, RVar):
            raise VariableResource(f"resource variable {r.name} in ground operation")


def res_add(r1: Resource, r2: Resource) -> Resource:
    _ground(r1, r2)
    if isinstance(r1, Bottom):
        return r2
    if isinstance(r2, Bottom):
        return r1
    return Labels(r1.labels | r2.labels)


def res_mul(r1: Resource, r2: Resource) -> Resource:
    _ground(r1, r2)
    if isinstance(r1, Bottom) or isinstance(r2, Bottom):
        return BOTTOM
    return Labels(r1.labels | r2.labels)


def res_leq(r1: Resource, r2: Resource) -> bool:
    _ground(r1, r2)
    if isinstance(r1, Bottom):
        return True
    if isinstance(r2, Bottom):
        return False
    return r1.labels <= r2.labels


def label_universe(reg: ModuleRegistry) -> list[VersionLabel]:
    """Every module-version combination, in ascending newest-preference order."""
    if not reg.modules:
        raise EmptyRegistry("registry has no modules")
    names = reg.module_names()
    return [
        VersionLabel(tuple(zip(names, combo)))
        for combo in itertools.product(*(reg.versions(n) for n in names))
    ]


def iter_resources(universe: list[VersionLabel]) -> Iterator[Resource]:
    """⊥ followed by every subset of ``universe``."""
    yield BOTTOM
    for k in range(len(universe) + 1):
        for combo in itertools.combinations(universe, k):
            yield Labels(frozenset(combo))
