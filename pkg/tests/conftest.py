import os
from pathlib import Path

import numpy as np
import pytest

from grayplane.harness import CorpusImage
from grayplane.imagefile import luma, write_pgm

DATA = Path(__file__).parent / "data"

# Natural, textured photographs shipped inside scikit-image's data package.
TEXTURED = (
    "astronaut", "brick", "camera", "chelsea", "clock_motion", "coffee", "coins",
    "grass", "gravel", "hubble_deep_field", "ihc", "moon", "motorcycle_left",
    "retina", "rocket",
)
MAX_SIDE = 512

_acceptance_lines: list[str] = []


def _load_textured() -> list[CorpusImage]:
    skdata = pytest.importorskip("skimage.data")
    from skimage import io

    root = os.path.dirname(skdata.__file__)
    files = {os.path.splitext(f)[0]: f for f in os.listdir(root)}
    images = []
    for name in TEXTURED:
        arr = io.imread(os.path.join(root, files[name]))
        if arr.ndim == 3:
            arr = luma(arr[..., :3])
        arr = arr.astype(np.uint8)
        h, w = arr.shape
        side = min(h, w, MAX_SIDE)
        top, left = (h - side) // 2, (w - side) // 2
        images.append(CorpusImage(f"{name}.pgm", arr[top:top + side, left:left + side].copy()))
    return images


@pytest.fixture(scope="session")
def textured_corpus():
    return _load_textured()


@pytest.fixture(scope="session")
def textured_corpus_dir(tmp_path_factory, textured_corpus):
    root = tmp_path_factory.mktemp("textured")
    for item in textured_corpus:
        write_pgm(root / item.name, item.pixels)
    return root


@pytest.fixture
def fixture_corpus_dir():
    return DATA / "fixture_corpus"


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
