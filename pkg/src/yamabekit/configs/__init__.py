"""Bundled example job files."""

from importlib import resources
from pathlib import Path

NAMES = (
    "flat_gaussian",
    "shrinking_product",
    "expanding_product",
    "steady_origin",
    "random_battery",
    "sphere_non_soliton",
    "asymmetric_metric",
)


def path(name: str) -> Path:
    """Filesystem path of a bundled config (``name`` with or without ``.toml``)."""
    stem = name[:-5] if name.endswith(".toml") else name
    if stem not in NAMES:
        raise KeyError(f"no bundled config {name!r}; available: {', '.join(NAMES)}")
    return Path(str(resources.files(__name__) / f"{stem}.toml"))
