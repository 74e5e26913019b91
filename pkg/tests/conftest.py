import pathlib

import pytest

from darkit.spikedef import SourceFile

FIXTURE_DIR = pathlib.Path(__file__).resolve().parents[1] / "src" / "darkit" / "fixtures"


@pytest.fixture(scope="session")
def fixture_paths():
    paths = sorted(FIXTURE_DIR.glob("*.sd"))
    assert len(paths) >= 10
    return paths


@pytest.fixture()
def tiny_source():
    return SourceFile.from_path(FIXTURE_DIR / "tiny_spike_gpt.sd")


@pytest.fixture()
def simple_source():
    return SourceFile.from_path(FIXTURE_DIR / "simple_linear.sd")


SIMPLE_TEXT = (
    "class M(Module):\n"
    "    def __init__(self):\n"
    "        self.fc = Linear(4, 4)\n"
    "    def forward(self, x):\n"
    "        return self.fc(x)\n"
)
