from pathlib import Path

import pytest

from rodcasimir.dielectric import ConstantModel, DielectricModel, load_material_card
from rodcasimir.matsubara import ThermalEnvironment
from rodcasimir.rod_kernel import RodSystem

PKG_ROOT = Path(__file__).resolve().parents[1]
DATA = Path(__file__).resolve().parent / "data"
CARDS = PKG_ROOT / "src" / "rodcasimir" / "data" / "materials"


def constant(value, label=None):
    return DielectricModel(ConstantModel(value), label=label or f"eps{value:g}")


@pytest.fixture(scope="session")
def cards():
    return {name: load_material_card(CARDS / f"{name}.card")
            for name in ("silica", "zno", "bromobenzene", "vacuum")}


@pytest.fixture(scope="session")
def representative(cards):
    return RodSystem(1e-9, 1e-9, cards["silica"], cards["zno"], cards["bromobenzene"])


@pytest.fixture(scope="session")
def toy_system():
    return RodSystem(1e-9, 1e-9, constant(2.0), constant(4.0), constant(3.0))


@pytest.fixture(scope="session")
def env():
    return ThermalEnvironment(300.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
