import sys
from pathlib import Path

import pytest

# Add the project root directory to the Python path
root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))

FIXTURES = Path(__file__).parent / "fixtures"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size benchmark acceptance run")


@pytest.fixture
def mini_instances_path():
    """Bundled COCO sample: 3 images, 7 annotations"""
    return FIXTURES / "mini_instances.json"


@pytest.fixture
def half_mask_scene():
    from tests.util.scenes import half_mask_scene
    return half_mask_scene()


@pytest.fixture
def thin_diagonal_scene():
    from tests.util.scenes import thin_diagonal_scene
    return thin_diagonal_scene()
