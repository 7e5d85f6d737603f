"""Genome evaluators: real CNN training, and cheap surrogate landscapes.

An evaluator is any callable ``evaluator(genome, seed)`` returning a fitness
or an :class:`~cmcnn.ga.Evaluation`. Surrogates score a genome without
training and make GA behaviour testable in milliseconds.
"""

from dataclasses import replace
import hashlib

from . import rng as rngs
from .activations import Activation
from .compensatory import DEFAULT_W, EvalRecord
from .ga import Evaluation
from .metrics import AVERAGES, confusion
from .nn.model import build_model
from .nn.training import TrainConfig, predict, train


class TrainingEvaluator:
    """Build, train and score one network per genome.

    Parameters
    ----------
    arch : ArchSpec
    train_set, test_set : LabeledImageSet
    train_cfg : TrainConfig
        ``train_cfg.seed`` is mixed with the per-genome seed for shuffling.
    fitness_metric : {"train_f1", "test_f1"}
    w : float
        Weight stored on each record for its alpha values.
    average : {"macro", "micro"}
    keep_model : bool
        Attach the trained model to the returned evaluation.
    """

    def __init__(self, arch, train_set, test_set, train_cfg=TrainConfig(),
                 fitness_metric="train_f1", w=DEFAULT_W, average="macro",
                 keep_model=True):
        self.arch = arch
        self.train_set = train_set
        self.test_set = test_set
        self.train_cfg = train_cfg
        self.fitness_metric = fitness_metric
        self.w = w
        self.average = average
        self.keep_model = keep_model

    def _f1(self, labels, pred):
        return AVERAGES[self.average](confusion(labels, pred, self.arch.num_classes))

    def __call__(self, genome, seed=0):
        model = build_model(self.arch, genome, seed)
        cfg = replace(self.train_cfg,
                      seed=rngs.derive_seed(seed, "shuffle", self.train_cfg.seed))
        model, t_train = train(model, self.train_set, cfg)
        pred_train, _ = predict(model, self.train_set)
        pred_test, t_predict = predict(model, self.test_set)
        record = EvalRecord.from_scores(
            self._f1(self.train_set.labels, pred_train),
            self._f1(self.test_set.labels, pred_test),
            self.arch.n_conv_layers, self.arch.reference_layers, self.w,
            t_train, t_predict, model.param_bytes)
        fitness = record.f1_train if self.fitness_metric == "train_f1" else record.f1_test
        return Evaluation(fitness, record, model if self.keep_model else None)


def fraction_of(activation=Activation.RELU):
    """Landscape scoring the share of genes equal to ``activation``."""
    activation = Activation(activation)

    def landscape(genome, seed=None):
        return sum(g is activation for g in genome) / len(genome)

    landscape.__name__ = f"fraction_of_{activation.value}"
    return landscape


def hashed_landscape(salt=0):
    """Deterministic pseudo-random fitness in [0, 1) per genome."""

    def landscape(genome, seed=None):
        digest = hashlib.sha256(f"{salt}:{genome}".encode()).digest()
        return int.from_bytes(digest[:8], "little") / 2 ** 64

    landscape.__name__ = f"hashed_{salt}"
    return landscape


def target_match(target):
    """Share of positions agreeing with ``target``; a single global optimum."""

    def landscape(genome, seed=None):
        return sum(a is b for a, b in zip(genome, target)) / len(target)

    return landscape


LANDSCAPES = {
    "relu_fraction": lambda: fraction_of(Activation.RELU),
    "hashed": hashed_landscape,
}


class SurrogateEvaluator:
    """Wrap a landscape so it reports full records like a trained model.

    Both F1 entries carry the landscape value; timings are zero and the
    parameter bytes come from the architecture, no model is built.
    """

    def __init__(self, arch, landscape, w=DEFAULT_W):
        self.arch = arch
        self.landscape = landscape
        self.w = w

    def __call__(self, genome, seed=0):
        f = float(self.landscape(genome, seed))
        record = EvalRecord.from_scores(f, f, self.arch.n_conv_layers,
                                        self.arch.reference_layers, self.w,
                                        param_bytes=self.arch.param_bytes())
        return Evaluation(f, record)
