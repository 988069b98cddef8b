from __future__ import annotations

from pathlib import Path

import pytest

from qualbn.model import Network
from qualbn.native_format import read_native
from qualbn.suite import parse_suite
from qualbn.xdsl_format import read_xdsl

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture(scope="session")
def resp_net() -> Network:
    return read_native((MODELS / "resp_simple.bn").read_text())


@pytest.fixture(scope="session")
def resp_xdsl_net() -> Network:
    return read_xdsl((MODELS / "resp_simple.xdsl").read_text())


@pytest.fixture(scope="session")
def resp_suite():
    return parse_suite((MODELS / "resp_simple.suite").read_text(), name="resp_simple")


@pytest.fixture(scope="session")
def xor_net() -> Network:
    return read_native((MODELS / "xor_constraint.bn").read_text())
