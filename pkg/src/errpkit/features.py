"""The two featurizers.

Riemannian route: average the training epochs of each class over the
analysis window into per-class prototype matrices, stack
[success prototype; failure prototype; trial] into a super trial, take its
shrunk sample covariance, and project onto the tangent space at the
geometric mean of the training covariances.

Benchmark route: per channel, the mean and standard deviation over four
fixed windows, each feature scaled by its maximum absolute value in the
training set.

Both have a fit phase (training epochs only) and a pure transform phase.
Fitted models are immutable; fitting is bit-identical under any permutation
of the training epochs (canonical summation, max-based scaling).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import manifold
from .errors import DegenerateTrainingSet, DimMismatch, EmptyInput, InvalidWindow, NotPositiveDefinite
from .labels import FAILURE, SUCCESS
from .preprocessing import Epoch, EpochSet, _window_slice

RIEMANN_WINDOW = (0.100, 0.600)
BENCHMARK_WINDOWS = ((0.100, 0.200), (0.200, 0.300), (0.300, 0.400), (0.400, 0.600))
DEFAULT_SHRINKAGE = 0.01


@dataclass(frozen=True)
class PrototypePair:
    """Per-class mean ERPs over the analysis window, (n_channels, n_window) each."""

    proto_success: np.ndarray
    proto_failure: np.ndarray

    def __post_init__(self):
        if self.proto_success.shape != self.proto_failure.shape:
            raise DimMismatch("prototype shapes differ")

    @property
    def n_channels(self) -> int:
        return self.proto_success.shape[0]

    @property
    def n_window(self) -> int:
        return self.proto_success.shape[1]


@dataclass(frozen=True)
class RiemannModel:
    window: tuple[float, float]
    prototypes: PrototypePair
    reference: np.ndarray  # (3c, 3c) geometric mean of training covariances
    shrinkage: float
    fs_hz: float


@dataclass(frozen=True)
class BenchmarkModel:
    windows: tuple[tuple[float, float], ...]
    scale: np.ndarray  # per-feature positive max-abs from training
    fs_hz: float
    n_channels: int


def super_trial(epoch_window: np.ndarray, protos: PrototypePair) -> np.ndarray:
    """Stack [success prototype; failure prototype; trial], (3c, n_window)."""
    trial = np.asarray(epoch_window, dtype=np.float64)
    if trial.shape != (protos.n_channels, protos.n_window):
        raise DimMismatch(
            f"trial window {trial.shape} does not match prototypes "
            f"({protos.n_channels}, {protos.n_window})"
        )
    return np.concatenate([protos.proto_success, protos.proto_failure, trial], axis=0)


def _covariances(stack: np.ndarray, shrinkage: float) -> np.ndarray:
    """Shrunk sample covariances of a stack of (d, w) matrices -> (n, d, d).

    C = (1 - s) * Xc Xc' / (w - 1) + s * mu * I   with mu = trace / d.
    Eigenvalues of C are bounded below by s * mu, so the result is SPD for
    s > 0 whenever the input is nonzero.
    """
    if not 0.0 <= shrinkage < 1.0:
        raise ValueError(f"shrinkage must be in [0, 1), got {shrinkage}")
    stack = np.asarray(stack, dtype=np.float64)
    d, w = stack.shape[-2], stack.shape[-1]
    if w < 2:
        raise InvalidWindow(f"need at least 2 samples for a covariance, got {w}")
    xc = stack - stack.mean(axis=-1, keepdims=True)
    cov = xc @ xc.swapaxes(-1, -2) / (w - 1)
    cov = 0.5 * (cov + cov.swapaxes(-1, -2))
    mu = np.trace(cov, axis1=-2, axis2=-1) / d
    if shrinkage > 0.0:
        if np.any(mu <= 0.0):
            raise NotPositiveDefinite("zero covariance cannot be shrunk to SPD")
        eye = np.eye(d)
        cov = (1.0 - shrinkage) * cov + shrinkage * mu[..., None, None] * eye
    else:
        eig = np.linalg.eigvalsh(cov)
        floor = eig[..., -1] * d * 1e-12
        if np.any(eig[..., 0] <= floor) or np.any(eig[..., -1] <= 0.0):
            raise NotPositiveDefinite(
                "sample covariance is singular or near-singular; raise the shrinkage"
            )
    return cov


def trial_covariance(st: np.ndarray, shrinkage: float = DEFAULT_SHRINKAGE) -> np.ndarray:
    """Shrunk sample covariance of one super trial, (3c, 3c)."""
    st = np.asarray(st, dtype=np.float64)
    if st.ndim != 2:
        raise DimMismatch("super trial must be a 2-D matrix")
    return _covariances(st[None], shrinkage)[0]


def _sliced(es: EpochSet, window: tuple[float, float]) -> np.ndarray:
    sl = _window_slice(es.fs_hz, es.t0_offset_s, es.n_samples, window[0], window[1])
    return es.data[:, :, sl]


def fit_riemann(
    train: EpochSet,
    window: tuple[float, float] = RIEMANN_WINDOW,
    shrinkage: float = DEFAULT_SHRINKAGE,
    mean_tol: float = 1e-8,
    mean_max_iter: int = 50,
) -> RiemannModel:
    """Fit prototypes and the tangent-space reference point on training epochs only."""
    counts = train.class_counts()
    if counts.get(SUCCESS, 0) == 0 or counts.get(FAILURE, 0) == 0:
        raise DegenerateTrainingSet(f"need both classes in training data, got {counts}")
    windowed = _sliced(train, window)
    protos = PrototypePair(
        proto_success=manifold.canonical_mean(windowed[train.labels == SUCCESS]),
        proto_failure=manifold.canonical_mean(windowed[train.labels == FAILURE]),
    )
    sts = _super_trials(windowed, protos)
    covs = _covariances(sts, shrinkage)
    reference = manifold.geometric_mean(covs, tol=mean_tol, max_iter=mean_max_iter)
    return RiemannModel(tuple(window), protos, reference, shrinkage, train.fs_hz)


def _super_trials(windowed: np.ndarray, protos: PrototypePair) -> np.ndarray:
    n = windowed.shape[0]
    top = np.broadcast_to(
        np.concatenate([protos.proto_success, protos.proto_failure], axis=0),
        (n, 2 * protos.n_channels, protos.n_window),
    )
    return np.concatenate([top, windowed], axis=1)


def transform_riemann_set(model: RiemannModel, es: EpochSet) -> np.ndarray:
    """Tangent feature vectors for every epoch in the set, (n, D(D+1)/2)."""
    if es.n_channels != model.prototypes.n_channels:
        raise DimMismatch(
            f"epoch has {es.n_channels} channels, model expects {model.prototypes.n_channels}"
        )
    if es.fs_hz != model.fs_hz:
        raise DimMismatch(f"epoch rate {es.fs_hz} differs from model rate {model.fs_hz}")
    windowed = _sliced(es, model.window)
    if windowed.shape[-1] != model.prototypes.n_window:
        raise DimMismatch("window length does not match the fitted prototypes")
    sts = _super_trials(windowed, model.prototypes)
    covs = _covariances(sts, model.shrinkage)
    return manifold.tangent_project(covs, model.reference)


def transform_riemann(model: RiemannModel, e: Epoch) -> np.ndarray:
    es = EpochSet(e.data[None], np.asarray([e.label]), e.fs_hz, e.t0_offset_s,
                  [f"ch{i}" for i in range(e.data.shape[0])])
    return transform_riemann_set(model, es)[0]


def _benchmark_features(
    data: np.ndarray,
    fs: float,
    t0: float,
    windows: tuple[tuple[float, float], ...],
) -> np.ndarray:
    """Raw windowed features, (n, n_channels * n_windows * 2).

    Layout is channel-major, window-minor, with (mean, std) innermost; std
    uses the n-1 denominator.
    """
    n, c, s = data.shape
    feats = np.empty((n, c, len(windows), 2))
    for w, (t_a, t_b) in enumerate(windows):
        sl = _window_slice(fs, t0, s, t_a, t_b)
        if sl.stop - sl.start < 2:
            raise InvalidWindow(f"window [{t_a}, {t_b}] has fewer than 2 samples at fs={fs}")
        seg = data[:, :, sl]
        feats[:, :, w, 0] = seg.mean(axis=-1)
        feats[:, :, w, 1] = seg.std(axis=-1, ddof=1)
    return feats.reshape(n, c * len(windows) * 2)


def fit_benchmark(
    train: EpochSet,
    windows: tuple[tuple[float, float], ...] = BENCHMARK_WINDOWS,
) -> BenchmarkModel:
    """Record each feature's max absolute value over the training set (0 -> 1)."""
    if len(train) == 0:
        raise EmptyInput("cannot fit on an empty epoch set")
    feats = _benchmark_features(train.data, train.fs_hz, train.t0_offset_s, windows)
    scale = np.abs(feats).max(axis=0)
    scale[scale == 0.0] = 1.0
    return BenchmarkModel(tuple(tuple(w) for w in windows), scale, train.fs_hz,
                          train.n_channels)


def transform_benchmark_set(model: BenchmarkModel, es: EpochSet) -> np.ndarray:
    if es.n_channels != model.n_channels:
        raise DimMismatch(
            f"epoch has {es.n_channels} channels, model expects {model.n_channels}"
        )
    if es.fs_hz != model.fs_hz:
        raise DimMismatch(f"epoch rate {es.fs_hz} differs from model rate {model.fs_hz}")
    feats = _benchmark_features(es.data, es.fs_hz, es.t0_offset_s, model.windows)
    return feats / model.scale


def transform_benchmark(model: BenchmarkModel, e: Epoch) -> np.ndarray:
    es = EpochSet(e.data[None], np.asarray([e.label]), e.fs_hz, e.t0_offset_s,
                  [f"ch{i}" for i in range(e.data.shape[0])])
    return transform_benchmark_set(model, es)[0]
