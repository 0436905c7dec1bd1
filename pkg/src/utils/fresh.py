"""Fresh names.

Deterministic name generation, so that two runs over the same
input print byte-identical programs and types.
"""
import re

_SUFFIX = re.compile(r"^(.*?)_(\d+)$")


def fresh_name(base, avoid):
    # type: (str, set[str] | frozenset[str]) -> str
    """
    Return `base` if it is not in `avoid`, otherwise the first of
    `base_1`, `base_2`, ... that is not. A numeric suffix already
    present on `base` is dropped before numbering.
    """
    if base not in avoid:
        return base
    match = _SUFFIX.match(base)
    stem = match.group(1) if match and match.group(1) else base
    i = 1
    while f"{stem}_{i}" in avoid:
        i += 1
    return f"{stem}_{i}"


class NameSupply:
    """
    Counter-backed supply of names `prefix0`, `prefix1`, ...
    skipping every name in `avoid`.
    """

    def __init__(self, prefix, avoid=None):
        self.prefix = prefix
        self.avoid = set(avoid) if avoid else set()
        self._next = 0

    def __call__(self):
        while True:
            name = f"{self.prefix}{self._next}"
            self._next += 1
            if name not in self.avoid:
                self.avoid.add(name)
                return name

    def reserve(self, names):
        """Mark `names` as taken."""
        self.avoid.update(names)
