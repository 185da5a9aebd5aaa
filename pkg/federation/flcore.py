"""
Federated learning core: local training, server aggregation and evaluation
of a multinomial logistic-regression model on synthetic data.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import AggregationError, ArgumentError, ModelError

INIT_SCALE = 0.05
UTILITY_METRICS = ('accuracy', 'neg_loss')


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ModelParams:
    """
    Flat weight vector of a linear softmax classifier.

    The first ``features * classes`` entries are the coefficient matrix in
    row-major order, the trailing ``classes`` entries are the bias terms.
    """
    weights: np.ndarray
    features: int
    classes: int

    def __post_init__(self):
        weights = _frozen(np.ravel(self.weights), np.float64)
        if weights.size != self.features * self.classes + self.classes:
            raise ModelError(
                f'expected {self.features * self.classes + self.classes} weights '
                f'for {self.features} features x {self.classes} classes, got {weights.size}'
            )
        if not np.all(np.isfinite(weights)):
            raise ModelError('model weights must be finite')
        object.__setattr__(self, 'weights', weights)

    @property
    def dim(self):
        return int(self.weights.size)

    @property
    def coef(self):
        return self.weights[:self.features * self.classes].reshape(self.features, self.classes)

    @property
    def bias(self):
        return self.weights[self.features * self.classes:]

    def to_list(self):
        return [float(w) for w in self.weights]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix and integer labels held by one client (or the server)."""
    features: np.ndarray
    labels: np.ndarray
    classes: int
    owner: Optional[int] = None

    def __post_init__(self):
        features = _frozen(self.features, np.float64)
        labels = _frozen(self.labels, np.int64)
        if features.ndim != 2:
            raise ArgumentError('features must be a 2-d matrix')
        if features.shape[0] != labels.shape[0]:
            raise ArgumentError(
                f'{features.shape[0]} feature rows but {labels.shape[0]} labels'
            )
        if labels.size == 0:
            raise ArgumentError('a dataset needs at least one sample')
        if self.classes < 2:
            raise ArgumentError('a dataset needs at least two classes')
        if labels.min() < 0 or labels.max() >= self.classes:
            raise ArgumentError(f'labels must lie in 0..{self.classes - 1}')
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'labels', labels)

    @property
    def size(self):
        return int(self.labels.size)

    @property
    def dim(self):
        return int(self.features.shape[1])

    def label_proportions(self):
        return np.bincount(self.labels, minlength=self.classes) / self.size


@dataclass(frozen=True)
class TrainConfig:
    local_epochs: int = 1
    batch_size: int = 32
    learning_rate: float = 0.1
    rounds: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.local_epochs < 1:
            raise ArgumentError('local_epochs must be >= 1')
        if self.batch_size < 1:
            raise ArgumentError('batch_size must be >= 1')
        # zero is accepted here so a frozen model can be trained as a no-op;
        # simulation configs require a strictly positive rate
        if not np.isfinite(self.learning_rate) or self.learning_rate < 0:
            raise ArgumentError('learning_rate must be a finite non-negative number')
        if self.rounds < 1:
            raise ArgumentError('rounds must be >= 1')
        if not 0 <= self.seed < 2 ** 64:
            raise ArgumentError('seed must be a 64-bit unsigned integer')


def init_model(dim, classes, seed):
    """Seeded uniform initialisation in [-INIT_SCALE, INIT_SCALE]."""
    if dim < 1:
        raise ArgumentError('dim must be >= 1')
    if classes < 2:
        raise ArgumentError('classes must be >= 2')
    rng = np.random.default_rng(seed)
    weights = rng.uniform(-INIT_SCALE, INIT_SCALE, size=dim * classes + classes)
    return ModelParams(weights, dim, classes)


def _check_compatible(model, data):
    if model.features != data.dim or model.classes != data.classes:
        raise ModelError(
            f'model is {model.features}x{model.classes} but data is '
            f'{data.dim} features with {data.classes} classes'
        )


def _logits(weights, n_features, n_classes, features):
    coef = weights[:n_features * n_classes].reshape(n_features, n_classes)
    return features @ coef + weights[n_features * n_classes:]


def _log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _gradient(weights, n_features, n_classes, features, labels):
    residual = np.exp(_log_softmax(_logits(weights, n_features, n_classes, features)))
    residual[np.arange(labels.size), labels] -= 1.0
    residual /= labels.size
    return np.concatenate([(features.T @ residual).ravel(), residual.sum(axis=0)])


def loss(model, data):
    """Mean multinomial cross-entropy of ``model`` on ``data``."""
    _check_compatible(model, data)
    log_probs = _log_softmax(_logits(model.weights, model.features, model.classes, data.features))
    return float(-log_probs[np.arange(data.size), data.labels].mean())


def gradient(model, data):
    """Full-batch gradient of :func:`loss`, flattened like the model weights."""
    _check_compatible(model, data)
    return _gradient(model.weights, model.features, model.classes, data.features, data.labels)


def client_update(client, model, cfg, round_index=0):
    """
    Run ``cfg.local_epochs`` of mini-batch SGD on the client's data.

    The shuffling stream is derived from (seed, round, client), so the same
    inputs always produce the same update. ``model`` is never modified.
    """
    _check_compatible(model, client)
    owner = -1 if client.owner is None else client.owner
    rng = np.random.default_rng((cfg.seed, round_index, owner + 1))
    weights = model.weights.copy()
    for _ in range(cfg.local_epochs):
        order = rng.permutation(client.size)
        for start in range(0, client.size, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            weights -= cfg.learning_rate * _gradient(
                weights, model.features, model.classes,
                client.features[batch], client.labels[batch],
            )
    return ModelParams(weights, model.features, model.classes)


def server_update(updates: Sequence[ModelParams], aggregation_weights: Sequence[float]):
    """FedAvg: the aggregation-weight-normalised mean of the updates."""
    if not updates:
        raise AggregationError('no updates to aggregate')
    if len(aggregation_weights) != len(updates):
        raise AggregationError(
            f'{len(updates)} updates but {len(aggregation_weights)} aggregation weights'
        )
    weights = np.asarray(aggregation_weights, dtype=np.float64)
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise AggregationError('aggregation weights must be finite and non-negative')
    total = weights.sum()
    if total <= 0:
        raise AggregationError('aggregation weights sum to zero')

    first = updates[0]
    for update in updates[1:]:
        if (update.features, update.classes) != (first.features, first.classes):
            raise ModelError('all updates must share the same shape')
    if len(updates) == 1:
        return first

    # reduction in client order keeps the result bit-reproducible
    aggregate = np.zeros(first.dim)
    for share, update in zip(weights / total, updates):
        aggregate += share * update.weights
    return ModelParams(aggregate, first.features, first.classes)


def predict(model, features):
    # argmax returns the first maximum, i.e. ties go to the lowest class
    return np.argmax(_logits(model.weights, model.features, model.classes, features), axis=1)


def evaluate(model, test):
    """Accuracy of ``model`` on ``test``."""
    if test.size == 0:
        raise ArgumentError('cannot evaluate on an empty test set')
    _check_compatible(model, test)
    return float(np.mean(predict(model, test.features) == test.labels))


def utility(model, test, metric='accuracy'):
    if metric == 'accuracy':
        return evaluate(model, test)
    if metric == 'neg_loss':
        return -loss(model, test)
    raise ArgumentError(f'unknown utility metric {metric!r}; expected one of {UTILITY_METRICS}')


def run_round(global_model, clients, cfg, round_index=0):
    """
    Broadcast the global model, train every client and aggregate by
    dataset size.

    Returns the new global model and the raw per-client updates in client
    order (the contribution step needs both).
    """
    if not clients:
        raise ArgumentError('a round needs at least one client')
    updates = [client_update(client, global_model, cfg, round_index) for client in clients]
    new_global = server_update(updates, [client.size for client in clients])
    return new_global, updates


def generate_synthetic_federation(n_clients, samples_per_client, classes, dim,
                                  dirichlet_alpha, seed, test_samples=None, separation=3.0):
    """
    Gaussian class clusters split across clients with Dirichlet label skew.

    Smaller ``dirichlet_alpha`` gives more skewed clients. The held-out test
    set is IID and class-balanced. Returns ``(clients, test)``.
    """
    if n_clients < 1:
        raise ArgumentError('n_clients must be >= 1')
    if samples_per_client < 1:
        raise ArgumentError('samples_per_client must be >= 1')
    if classes < 2:
        raise ArgumentError('classes must be >= 2')
    if dim < 1:
        raise ArgumentError('dim must be >= 1')
    if not dirichlet_alpha > 0:
        raise ArgumentError('dirichlet_alpha must be positive')
    if separation <= 0:
        raise ArgumentError('separation must be positive')

    rng = np.random.default_rng(seed)
    means = rng.normal(0.0, separation, size=(classes, dim))
    proportions = rng.dirichlet(np.full(classes, float(dirichlet_alpha)), size=n_clients)

    clients = []
    for owner, row in enumerate(proportions):
        row = np.nan_to_num(row)
        row = row / row.sum() if row.sum() > 0 else np.full(classes, 1.0 / classes)
        labels = np.repeat(np.arange(classes), rng.multinomial(samples_per_client, row))
        rng.shuffle(labels)
        features = means[labels] + rng.normal(size=(samples_per_client, dim))
        clients.append(Dataset(features, labels, classes, owner=owner))

    test_size = test_samples or samples_per_client
    labels = np.arange(test_size) % classes
    rng.shuffle(labels)
    test = Dataset(means[labels] + rng.normal(size=(test_size, dim)), labels, classes)
    return clients, test
