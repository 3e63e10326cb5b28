import json

import pytest

from islandstrat.config import ExperimentConfig
from islandstrat.island import PeConfig, SurfaceConfig, TreatmentConfig
from islandstrat.mesh import MeshConfig


def small_config(**overrides) -> ExperimentConfig:
    base = dict(
        mesh=MeshConfig(3, 2, halt_generations=20),
        pe=PeConfig(8, 3),
        treatment=TreatmentConfig(),
        surface=SurfaceConfig("steady", 16, 8),
        seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@pytest.fixture
def config_file(tmp_path):
    def write(config: ExperimentConfig = None, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps((config or small_config()).to_dict()))
        return path

    return write


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
