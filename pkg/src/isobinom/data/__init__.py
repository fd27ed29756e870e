"""Bundled example data."""

from importlib import resources

BUNDLED = ("malformation.csv",)


def bundled_path(name: str = "malformation.csv"):
    """Filesystem path of a bundled dataset."""
    if name not in BUNDLED:
        raise FileNotFoundError(f"no bundled dataset named {name!r}")
    return resources.files(__name__).joinpath(name)
