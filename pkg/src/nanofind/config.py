"""Flat ``key = value`` configuration files.

Blank lines and lines starting with ``#`` are ignored. Keys are the field
names of :class:`~nanofind.pipeline.DetectConfig` or
:class:`~nanofind.synthgen.SynthConfig`; list values are comma-separated.
"""


def read_kv(path):
    """Parse a key=value file into an ordered dict of strings."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ValueError(f"{path}:{lineno}: empty key")
            out[key] = value
    return out


def write_kv(mapping, path):
    with open(path, "w") as fh:
        for key, value in mapping.items():
            fh.write(f"{key} = {value}\n")
