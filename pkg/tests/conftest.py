import sys
from pathlib import Path

import pytest

# make `import frozen` work from any invocation directory
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def tmp_cache_dir(tmp_path):
    d = tmp_path / "cache"
    d.mkdir()
    return d
