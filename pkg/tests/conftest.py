import numpy as np
import pytest

from abstract_labelembed.em_driver import EmConfig
from abstract_labelembed.model_core import (
    AnnotationDataset, ClassLabels, GaussianPrior, Instance, VoteCounts,
)
from abstract_labelembed.sampler import McmcConfig

TABLE1_CLASSES = ("contradiction", "neutral", "entailment")
TABLE1_COUNTS = [(0, 0, 100), (42, 14, 44), (46, 53, 1), (34, 31, 35)]


def make_dataset(counts, names=None, golds=None, metadata=None, ids=None):
    counts = [tuple(int(c) for c in row) for row in counts]
    K = len(counts[0])
    names = names or tuple(f"c{k + 1}" for k in range(K))
    instances = []
    for i, row in enumerate(counts):
        instances.append(Instance(
            instance_id=ids[i] if ids else f"s{i + 1}",
            votes=VoteCounts(counts=row),
            gold=golds[i] if golds else None,
            metadata=metadata[i] if metadata else {},
        ))
    return AnnotationDataset(labels=ClassLabels(names=tuple(names)), instances=tuple(instances))


@pytest.fixture
def table1():
    return make_dataset(TABLE1_COUNTS, TABLE1_CLASSES)


@pytest.fixture
def fast_mcmc():
    return McmcConfig(n_retained=200, burn_in=100, thin=2, proposal_scale=0.5, seed=11)


@pytest.fixture
def fast_em(fast_mcmc):
    return EmConfig(max_iterations=4, min_iterations=0, rel_tol=1e-3, mcmc=fast_mcmc)


@pytest.fixture
def standard_prior3():
    return GaussianPrior(mu=np.zeros(3), sigma=np.eye(3))


@pytest.fixture
def table1_csv(tmp_path):
    path = tmp_path / "table1.csv"
    lines = ["instance_id," + ",".join(TABLE1_CLASSES)]
    lines += [f"s{i + 1}," + ",".join(str(c) for c in row) for i, row in enumerate(TABLE1_COUNTS)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
