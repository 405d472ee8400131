"""Access to the data files bundled with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

_BUNDLED = {
    "lexicon": "lexicon.tsv",
    "names": "names.txt",
    "swaps": "swaps.txt",
    "attributes_female": "attributes_female.txt",
    "attributes_male": "attributes_male.txt",
    "stopwords": "stopwords.txt",
}


def bundled_path(name: str) -> Path:
    """Return the filesystem path of a bundled resource by short name."""
    try:
        filename = _BUNDLED[name]
    except KeyError:
        raise KeyError(f"no bundled resource named {name!r}; known: {sorted(_BUNDLED)}")
    return Path(str(resources.files("eventbias.data").joinpath(filename)))


def read_token_list(path: str | Path) -> list[str]:
    """Read a one-token-per-line file, skipping blanks and # comments."""
    tokens = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            tokens.append(line)
    return tokens
