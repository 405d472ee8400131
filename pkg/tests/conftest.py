import io
import json
from pathlib import Path

import pytest

from eventbias import cli, fixtures


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    """Session-wide copy of the bundled synthetic corpus and demo embeddings."""
    root = tmp_path_factory.mktemp("fixture")
    fixtures.write_fixture_corpus(root / "corpus.jsonl")
    fixtures.write_demo_embeddings(root / "embeddings.txt")
    return root


@pytest.fixture(scope="session")
def corpus_path(fixture_dir) -> Path:
    return fixture_dir / "corpus.jsonl"


@pytest.fixture(scope="session")
def embeddings_path(fixture_dir) -> Path:
    return fixture_dir / "embeddings.txt"


def run_cli(*args: str) -> tuple[int, str]:
    """Invoke the CLI in-process, returning (exit_code, stdout_text)."""
    buf = io.StringIO()
    code = cli.main([str(a) for a in args], stdout=buf)
    return code, buf.getvalue()


def verify_review_file(path: Path) -> int:
    """Flip every harvested template to verified, as a reviewer would."""
    entries = [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
    for entry in entries:
        entry["verified"] = True
    path.write_text(
        "".join(json.dumps(e, ensure_ascii=False, separators=(",", ":")) + "\n" for e in entries)
    )
    return len(entries)
