"""Bundled desk-scale graphs."""
from importlib import resources

from .graph import Graph, load_edge_list


def karate_path():
    return resources.files("walkconv") / "data" / "karate.edges"


def karate() -> Graph:
    """Zachary's karate club (34 vertices, 78 edges, unit weights)."""
    with karate_path().open() as fh:
        return load_edge_list(fh)
