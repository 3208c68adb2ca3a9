"""Shared exception hierarchy.

Every pkgraph error derives from PkgraphError so callers (and the CLI)
can catch domain failures without swallowing programming errors.
"""


class PkgraphError(Exception):
    """Base class for all pkgraph domain errors."""
