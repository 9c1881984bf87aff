"""Global size caps, overridable through the ``SSLAB_CAPS`` environment variable.

The variable holds comma separated ``key=value`` pairs, e.g.
``SSLAB_CAPS="closure=2048,orbit=50000"``.
"""

import os

from .errors import SSLabError

DEFAULTS = {
    "closure": 4096,  # reachable section states / configurations
    "level": 1 << 20,  # admissible words enumerated at one level
    "orbit": 200_000,  # vertices in an orbit ball
    "depth": 24,  # depth bound for non-exact triviality checks
    "ray_cycles": 4096,  # period repetitions searched by apply_ray
    "instantiate": 64,  # maximum instantiated depth of level families
}


def _parse(text):
    caps = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, sep, value = chunk.partition("=")
        key = key.strip()
        if not sep or key not in DEFAULTS:
            raise SSLabError(f"bad SSLAB_CAPS entry {chunk!r}")
        caps[key] = int(value)
    return caps


def get(name):
    """Current value of cap ``name``; the environment is re-read on each call."""
    env = os.environ.get("SSLAB_CAPS", "")
    if env:
        caps = _parse(env)
        if name in caps:
            return caps[name]
    return DEFAULTS[name]


def effective():
    caps = dict(DEFAULTS)
    env = os.environ.get("SSLAB_CAPS", "")
    if env:
        caps.update(_parse(env))
    return caps
