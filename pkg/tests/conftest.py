import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from toydata import build_toy_corpus  # noqa: E402


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    return build_toy_corpus(tmp_path_factory.mktemp("toy_corpus"))
