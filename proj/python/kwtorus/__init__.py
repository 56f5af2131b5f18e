"""Python front end for the kw torus toolkit."""

import json as _json

from ._kw import *  # noqa: F401,F403
from ._kw import __version__, run as _run


def run(config, out, threads=1):
    """Run a pipeline from config text; returns (exit_code, manifest dict)."""
    code, manifest = _run(config, str(out), threads)
    return code, _json.loads(manifest)
