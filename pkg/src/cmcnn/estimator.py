"""scikit-learn compatible wrappers.

:class:`MultiFunctionCNNClassifier` trains one network with a fixed genome;
:class:`CompensatorySearch` runs the per-depth genetic search, keeps the
depth with the best compensatory fitness and then predicts with the winning
network. Both follow the usual ``get_params``/``set_params``/``fit``/
``predict`` contract so they drop into pipelines and ``clone``.
"""

import time

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .activations import DEFAULT_FUNCTION_SET, Activation
from .compensatory import DEFAULT_W, run_compensatory
from .data import LabeledImageSet
from .evaluators import TrainingEvaluator
from .exceptions import ConfigError, GenomeArityError, ShapeError
from .ga import GaConfig
from .genome import Genome
from .metrics import confusion, macro_f1
from .nn.arch import ArchSpec
from .nn.model import build_model
from .nn.training import TrainConfig, predict_proba, train


def _as_genome(genome, n):
    if genome is None:
        return Genome.uniform(Activation.RELU, n)
    if isinstance(genome, str):
        genome = Genome.parse(genome)
    elif not isinstance(genome, Genome):
        genome = Genome(tuple(genome))
    if len(genome) != n:
        raise GenomeArityError(f"genome {genome} has {len(genome)} genes, expected {n}")
    return genome


def _check_images(X, expected_shape=None):
    X = check_array(X, allow_nd=True, dtype=np.float32, ensure_2d=False)
    if X.ndim != 4:
        raise ShapeError(f"expected images shaped (n, C, H, W), got {X.shape}")
    if expected_shape is not None and X.shape[1:] != tuple(expected_shape):
        raise ShapeError(f"images have shape {X.shape[1:]}, model expects {expected_shape}")
    return X


class _ImageClassifierMixin(ClassifierMixin):

    def _encode(self, X, y):
        X, y = check_X_y(X, y, allow_nd=True, dtype=np.float32, ensure_2d=False)
        if X.ndim != 4:
            raise ShapeError(f"expected images shaped (n, C, H, W), got {X.shape}")
        check_classification_targets(y)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ConfigError("need at least two classes to fit")
        self.n_features_in_ = int(np.prod(X.shape[1:]))
        return X, y_enc

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[proba.argmax(axis=1)]


class MultiFunctionCNNClassifier(_ImageClassifierMixin, BaseEstimator):
    """A compressed CNN with one activation per conv layer.

    Parameters
    ----------
    n_conv_layers : int, default 4
    genome : str or sequence of Activation, optional
        E.g. ``"RELU-SIG-TANH-ELU"``. Defaults to RELU everywhere.
    reference_layers : int, default 10
        Only used for the size ratio; must be ``>= n_conv_layers``.
    base_channels, max_channels : int
    epochs, batch_size, learning_rate, momentum
        SGD settings.
    random_state : int, default 0
        Seeds weight initialization and batch order.

    Attributes
    ----------
    model_ : Model
    classes_ : ndarray
    train_seconds_ : float
    param_bytes_ : int
    """

    def __init__(self, n_conv_layers=4, genome=None, reference_layers=10,
                 base_channels=16, max_channels=128, epochs=10, batch_size=32,
                 learning_rate=0.01, momentum=0.9, random_state=0):
        self.n_conv_layers = n_conv_layers
        self.genome = genome
        self.reference_layers = reference_layers
        self.base_channels = base_channels
        self.max_channels = max_channels
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.random_state = random_state

    def _arch(self, image_shape, num_classes):
        return ArchSpec(self.n_conv_layers, max(self.reference_layers, self.n_conv_layers),
                        self.base_channels, num_classes, image_shape, self.max_channels)

    def fit(self, X, y):
        X, y_enc = self._encode(X, y)
        arch = self._arch(X.shape[1:], len(self.classes_))
        genome = _as_genome(self.genome, self.n_conv_layers)
        model = build_model(arch, genome, self.random_state)
        cfg = TrainConfig(self.epochs, self.batch_size, self.learning_rate,
                          self.momentum, self.random_state)
        self.model_, self.train_seconds_ = train(model, (X, y_enc), cfg)
        self.param_bytes_ = self.model_.param_bytes
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = _check_images(X, self.model_.arch.input_shape)
        return predict_proba(self.model_, X)

    @classmethod
    def from_model(cls, model, classes):
        """Wrap an already trained :class:`~cmcnn.nn.Model`."""
        est = cls(n_conv_layers=model.arch.n_conv_layers, genome=str(model.genome),
                  reference_layers=model.arch.reference_layers,
                  base_channels=model.arch.base_channels,
                  max_channels=model.arch.max_channels)
        est.model_ = model
        est.classes_ = np.asarray(classes)
        est.n_features_in_ = int(np.prod(model.arch.input_shape))
        est.param_bytes_ = model.param_bytes
        return est


class CompensatorySearch(_ImageClassifierMixin, BaseEstimator):
    """Pick depth and activations by genetic search and compensatory fitness.

    ``fit`` runs the genetic search for every depth in ``arch_grid``, scores
    each depth's best network with ``alpha = w * F + (1 - w) * (1 - n / m)``
    and keeps the winner for prediction.

    Parameters
    ----------
    arch_grid : tuple of int, default (4, 6, 8, 10)
    reference_layers : int, default 10
    w : float, default 0.7
    population_size : int, default 4
    generations : int, default 5
    mutation_prob : float, default 1.0
    function_set : tuple of str, default all four activations
    fitness_metric : {"train_f1", "test_f1"}, default "train_f1"
        ``"test_f1"`` needs ``X_test``/``y_test`` in ``fit``.
    selection : {"roulette", "uniform"}
    base_channels, max_channels, epochs, batch_size, learning_rate, momentum
        Network and SGD settings shared by every candidate.
    random_state : int, default 0
    n_jobs : int, default 1
        Threads used to evaluate a population. Results do not depend on it.

    Attributes
    ----------
    result_ : CompensatoryResult
    best_estimator_ : MultiFunctionCNNClassifier
    best_genome_ : Genome
    best_n_conv_layers_ : int
    best_alpha_ : float
    search_seconds_ : float
    """

    def __init__(self, arch_grid=(4, 6, 8, 10), reference_layers=10, w=DEFAULT_W,
                 population_size=4, generations=5, mutation_prob=1.0,
                 function_set=tuple(a.value for a in DEFAULT_FUNCTION_SET),
                 fitness_metric="train_f1", selection="roulette", base_channels=16,
                 max_channels=128, epochs=10, batch_size=32, learning_rate=0.01,
                 momentum=0.9, random_state=0, n_jobs=1):
        self.arch_grid = arch_grid
        self.reference_layers = reference_layers
        self.w = w
        self.population_size = population_size
        self.generations = generations
        self.mutation_prob = mutation_prob
        self.function_set = function_set
        self.fitness_metric = fitness_metric
        self.selection = selection
        self.base_channels = base_channels
        self.max_channels = max_channels
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.random_state = random_state
        self.n_jobs = n_jobs

    def ga_config(self):
        train_cfg = TrainConfig(self.epochs, self.batch_size, self.learning_rate,
                                self.momentum, self.random_state)
        return GaConfig(self.population_size, self.generations, self.mutation_prob,
                        tuple(Activation.parse(f) for f in self.function_set),
                        self.fitness_metric, self.selection, train_cfg, self.random_state)

    def fit(self, X, y, X_test=None, y_test=None):
        X, y_enc = self._encode(X, y)
        k = len(self.classes_)
        train_set = LabeledImageSet(X, y_enc, k)
        if X_test is None:
            if self.fitness_metric == "test_f1":
                raise ConfigError("fitness_metric='test_f1' needs X_test and y_test")
            test_set = train_set
        else:
            X_test = _check_images(X_test, X.shape[1:])
            y_test = np.searchsorted(self.classes_, np.asarray(y_test))
            test_set = LabeledImageSet(X_test, y_test, k)
        archs = [ArchSpec(n, self.reference_layers, self.base_channels, k, X.shape[1:],
                          self.max_channels) for n in self.arch_grid]
        cfg = self.ga_config()

        def make_evaluator(arch):
            return TrainingEvaluator(arch, train_set, test_set, cfg.train_cfg,
                                     cfg.fitness_metric, self.w)

        start = time.perf_counter()
        self.result_ = run_compensatory(archs, make_evaluator, cfg, self.w, jobs=self.n_jobs)
        self.search_seconds_ = time.perf_counter() - start
        winner = self.result_.winner
        self.best_genome_ = winner.best.genome
        self.best_n_conv_layers_ = winner.arch.n_conv_layers
        self.best_alpha_ = winner.alpha
        model = winner.best.evaluation.model if winner.best.evaluation else None
        if model is None:
            raise ConfigError(f"winning genome {self.best_genome_} failed to train")
        self.best_estimator_ = MultiFunctionCNNClassifier.from_model(model, self.classes_)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "best_estimator_")
        return self.best_estimator_.predict_proba(X)

    def f1_score(self, X, y):
        """Macro F1 of the winning network on ``(X, y)``."""
        pred = np.searchsorted(self.classes_, self.predict(X))
        y_enc = np.searchsorted(self.classes_, np.asarray(y))
        return macro_f1(confusion(y_enc, pred, len(self.classes_)))
