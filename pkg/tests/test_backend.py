from __future__ import annotations

import os
import subprocess
import sys

import pytest

from artifact import backend

PROBE = """
from artifact import backend
from artifact.losses import llw
from artifact.optimize import minimize_risk
r = minimize_risk(llw("hinge", 3), [0.5, 0.3, 0.2])
print(backend.NAME, repr(r.value))
"""


def _probe(pure: bool) -> list[str]:
    env = dict(os.environ)
    env.pop("ARTIFACT_PURE_PYTHON", None)
    if pure:
        env["ARTIFACT_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", PROBE], capture_output=True, text=True, env=env, check=True)
    return out.stdout.split()


def test_pure_python_fallback_is_selectable():
    name, value = _probe(True)
    assert name == "python"
    assert float(value) == pytest.approx(1.5, abs=1e-9)  # K (1 - max p)


@pytest.mark.skipif(backend.compiled_kernels is None, reason="compiled kernels not built")
def test_compiled_and_fallback_agree_end_to_end():
    a, b = _probe(False), _probe(True)
    assert a[0] == "compiled" and b[0] == "python"
    assert float(a[1]) == pytest.approx(float(b[1]), abs=1e-9)
