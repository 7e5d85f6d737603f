import numpy as np
import pytest

from cmcnn.activations import Activation
from cmcnn.data import synthetic_blobs
from cmcnn.evaluators import (LANDSCAPES, SurrogateEvaluator, TrainingEvaluator,
                              fraction_of, hashed_landscape, target_match)
from cmcnn.genome import Genome
from cmcnn.nn import ArchSpec, TrainConfig


def test_landscapes():
    g = Genome.parse("RELU-SIG-RELU-ELU")
    assert fraction_of(Activation.RELU)(g) == 0.5
    assert target_match(Genome.parse("RELU-SIG-TANH-TANH"))(g) == 0.5
    h = hashed_landscape(1)
    assert h(g) == h(g) and 0 <= h(g) < 1 and h(g) != hashed_landscape(2)(g)
    assert set(LANDSCAPES) == {"relu_fraction", "hashed"}


def test_surrogate_reports_full_records():
    arch = ArchSpec(4)
    ev = SurrogateEvaluator(arch, fraction_of())(Genome.uniform("RELU", 4))
    assert ev.fitness == 1.0
    assert ev.record.f1_train == ev.record.f1_test == 1.0
    assert ev.record.param_bytes == 67944
    assert ev.record.alpha_train == pytest.approx(0.88)
    assert ev.model is None


def test_training_evaluator():
    shape = (1, 6, 6)
    train = synthetic_blobs(2, 20, shape, separation=8.0, seed=1, pattern_seed=0)
    test = synthetic_blobs(2, 10, shape, separation=8.0, seed=2, pattern_seed=0)
    arch = ArchSpec(2, 4, 4, 2, shape, 8)
    ev = TrainingEvaluator(arch, train, test, TrainConfig(epochs=30), "test_f1", 0.7)
    out = ev(Genome.parse("ELU-TANH"), seed=3)
    rec = out.record
    assert out.fitness == rec.f1_test
    assert rec.size_ratio == 0.5 and rec.param_bytes == arch.param_bytes()
    assert rec.t_train_seconds > 0 and rec.t_predict_seconds > 0
    assert rec.f1_train >= 0.9
    assert out.model is not None
    again = ev(Genome.parse("ELU-TANH"), seed=3)
    assert again.record.f1_train == rec.f1_train
    for k in out.model.params:
        np.testing.assert_array_equal(out.model.params[k], again.model.params[k])
    lean = TrainingEvaluator(arch, train, test, TrainConfig(epochs=1), keep_model=False,
                             average="micro")
    assert lean(Genome.parse("ELU-TANH")).model is None
