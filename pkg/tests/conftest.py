import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def report(capsys, request):
    """report(ok, detail) prints one PASS/FAIL line outside pytest's capture
    and then asserts ok."""

    def emit(ok, detail=""):
        name = request.node.name
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
        assert ok, detail

    return emit
