import numpy as np
import pytest

import stylewarp as sw

DATA = __import__("pathlib").Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session", autouse=True)
def _kernel_warmup():
    # First call under the numba backend pays JIT compilation; do it once
    # here so timing-sensitive tests measure steady-state throughput.
    img = np.zeros((8, 8, 3), np.float32)
    fm = sw.extract_features(img, stride=4, scales=1)
    sw.correlation_matrix(fm, fm)
    x = np.zeros((1, 4, 4), np.float32)
    sw.idwt_haar(sw.dwt_haar(x))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def input_image():
    return sw.read_png(DATA / "input.png")


@pytest.fixture(scope="session")
def reference_image():
    return sw.read_png(DATA / "reference.png")


@pytest.fixture(scope="session")
def input_mask():
    labels = sw.read_png_labels(DATA / "input_mask.png")
    return sw.SemanticMask(labels, 6)


@pytest.fixture(scope="session")
def reference_mask():
    labels = sw.read_png_labels(DATA / "reference_mask.png")
    return sw.SemanticMask(labels, 6)
