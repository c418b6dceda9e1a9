import numpy as np
import pytest

from fusebench.datasets import ScoreDataset, SyntheticSpec, generate_synthetic


@pytest.fixture
def make_gaussian():
    """Factory for synthetic Gaussian datasets with per-modality separation."""

    def _make(seed=0, modalities=3, genuine=60, impostor=180,
              genuine_means=None, stddev=1.0, name="synthetic"):
        if genuine_means is None:
            genuine_means = tuple(1.5 - 0.3 * m for m in range(modalities))
        spec = SyntheticSpec(
            modality_count=modalities,
            genuine_means=tuple(genuine_means),
            genuine_stddevs=(stddev,) * modalities,
            impostor_means=(0.0,) * modalities,
            impostor_stddevs=(stddev,) * modalities,
            genuine_count=genuine,
            impostor_count=impostor,
            seed=seed,
        )
        return generate_synthetic(spec, name=name)

    return _make


@pytest.fixture
def tiny_dataset():
    """Four genuine + four impostor tuples, two modalities, hand-picked."""
    genuine = np.array([[0.9, 0.8], [0.7, 0.9], [0.8, 0.6], [0.6, 0.7]])
    impostor = np.array([[0.1, 0.3], [0.2, 0.1], [0.3, 0.2], [0.4, 0.4]])
    return ScoreDataset(2, genuine, impostor, name="tiny")
