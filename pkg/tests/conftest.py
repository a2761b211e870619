import numpy as np
import pytest

from voxelgym.nodes import NodeDef, NodeRegistry, standard_registry
from voxelgym.world import VoxelWorld

ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)


@pytest.fixture
def criterion(request):
    """Names an acceptance criterion; records pass/fail for the summary."""
    holder = {}
    yield lambda name: holder.__setitem__("name", name)
    if "name" in holder:
        rep = getattr(request.node, "rep_call", None)
        ACCEPTANCE_RESULTS.append((holder["name"], bool(rep and rep.passed)))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, passed in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")


def simple_registry() -> NodeRegistry:
    reg = NodeRegistry()
    reg.register(NodeDef("test:solid", solid=True, color=(100, 100, 100)))
    reg.register(NodeDef("test:soft", solid=False, color=(10, 10, 10)))
    return reg


def random_world(seed: int, size: int = 16, p_solid: float = 0.3) -> VoxelWorld:
    """World with one size^3 region of random solid/air cells."""
    assert size <= 16
    reg = simple_registry()
    world = VoxelWorld(reg)
    rng = np.random.default_rng(seed)
    block = (rng.random((size, size, size)) < p_solid).astype(np.uint16)
    chunk = np.zeros((16, 16, 16), dtype=np.uint16)
    chunk[:size, :size, :size] = block
    world.chunks[(0, 0, 0)] = chunk
    return world


def flat_ground_world(extent: int = 16) -> VoxelWorld:
    reg = simple_registry()
    world = VoxelWorld(reg)
    solid = reg.id_of("test:solid")
    world.fill_box((0, 0, 0), (extent - 1, 0, extent - 1), solid)
    return world


@pytest.fixture
def std_registry():
    return standard_registry()
