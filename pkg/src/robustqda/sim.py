"""Contamination study harness.

Generates labeled Gaussian mixtures with two independent noise
mechanisms (random relabeling and replacement by measurement outliers),
fits classical and robust QDA models on the contaminated data, and
summarizes the damage through extended confusion matrices, per-class KL
divergence of the scatter estimates, covariance determinants, and the
fraction of planted noise flagged as outlying.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import LocationScatter, mvn_sample, spd_cholesky
from .errors import ConfigError, DataError, DimensionMismatch, ZeroNoise
from .fileio import write_text_atomic
from .qda import classify_rows, fit_qda

__all__ = [
    "ClassSpec",
    "Contamination",
    "ExtendedConfusion",
    "MethodReport",
    "Scenario",
    "StudyReport",
    "SubclassTag",
    "Tags",
    "alpha_metric",
    "average_confusions",
    "extended_confusion",
    "format_scenario",
    "generate",
    "kl_metric",
    "parse_scenario",
    "preset_names",
    "preset_scenario",
    "run_study",
    "two_class_demo",
    "write_study_report",
]

KIND_CLEAN = 0
KIND_MISLABELED = 1
KIND_REPLACED = 2

_KIND_NAMES = {KIND_CLEAN: "clean", KIND_MISLABELED: "mislabeled", KIND_REPLACED: "replaced"}


@dataclass(frozen=True)
class SubclassTag:
    """Provenance of one generated row."""

    origin: int
    given: int
    kind: str


@dataclass(frozen=True)
class Tags:
    """Vectorized provenance for a generated dataset."""

    origin: np.ndarray
    given: np.ndarray
    kind: np.ndarray

    def __post_init__(self):
        for arr in (self.origin, self.given, self.kind):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.origin.shape[0]

    def row(self, i: int) -> SubclassTag:
        return SubclassTag(
            origin=int(self.origin[i]),
            given=int(self.given[i]),
            kind=_KIND_NAMES[int(self.kind[i])],
        )


@dataclass(frozen=True)
class Contamination:
    """Measurement-noise generator for one class.

    kind ``cluster``: draws from N(center, scale * sigma_g);
    kind ``shift``: draws from N(center, sigma_g);
    kind ``point``: every replaced row equals ``center`` exactly.
    """

    kind: str
    center: tuple
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("cluster", "point", "shift"):
            raise ConfigError(f"contamination kind must be cluster, point, or shift, got {self.kind!r}")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if self.scale <= 0.0:
            raise ConfigError(f"contamination scale must be positive, got {self.scale!r}")


@dataclass(frozen=True)
class ClassSpec:
    n: int
    mu: tuple
    sigma: tuple
    contamination: Contamination | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        sig = np.asarray(self.sigma, dtype=np.float64)
        if sig.ndim == 1:
            sig = np.diag(sig)
        object.__setattr__(self, "sigma", tuple(tuple(row) for row in sig))
        if self.n < 1:
            raise ConfigError(f"class size must be positive, got {self.n}")

    @property
    def p(self) -> int:
        return len(self.mu)

    def loc_scat(self) -> LocationScatter:
        return LocationScatter.from_sigma(np.array(self.mu), np.array(self.sigma))


@dataclass(frozen=True)
class Scenario:
    classes: tuple
    eps_label: float = 0.0
    eps_meas: float = 0.0
    seed: int = 0
    name: str = "custom"

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ConfigError("a scenario needs at least two classes")
        p = self.classes[0].p
        for i, cls in enumerate(self.classes, start=1):
            if cls.p != p:
                raise ConfigError(f"class {i} has dimension {cls.p}, expected {p}")
        for name, eps in (("eps_label", self.eps_label), ("eps_meas", self.eps_meas)):
            if not (0.0 <= eps < 0.5):
                raise ConfigError(f"{name} must lie in [0, 0.5), got {eps!r}")
        if self.eps_label + self.eps_meas >= 0.5:
            raise ConfigError("eps_label + eps_meas must stay below 0.5")
        if self.eps_meas > 0.0:
            for i, cls in enumerate(self.classes, start=1):
                if cls.contamination is None:
                    raise ConfigError(f"class {i} needs a contamination spec when eps_meas > 0")

    @property
    def p(self) -> int:
        return self.classes[0].p

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def n_total(self) -> int:
        return sum(c.n for c in self.classes)


def generate(scenario: Scenario, rng: np.random.Generator | None = None):
    """Draw one contaminated dataset.

    Per class: sample ``n_g`` rows from the class Gaussian; relabel
    ``floor(eps_label * n_g)`` of them, spread as evenly as possible over
    the other labels; then replace ``floor(eps_meas * n_g)`` rows that are
    still clean with draws from the contamination spec (these keep the
    class label).  Returns ``(X, y, tags)`` with rows grouped by origin
    class.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(scenario.seed))
    G = scenario.n_classes
    xs, ys, origins, kinds = [], [], [], []
    for g, cls in enumerate(scenario.classes, start=1):
        ls = cls.loc_scat()
        Xg = mvn_sample(rng, ls, cls.n)
        yg = np.full(cls.n, g, dtype=np.int64)
        kind = np.full(cls.n, KIND_CLEAN, dtype=np.int8)

        m_label = int(math.floor(scenario.eps_label * cls.n))
        if m_label > 0:
            chosen = rng.choice(cls.n, size=m_label, replace=False)
            others = [k for k in range(1, G + 1) if k != g]
            base, extra = divmod(m_label, len(others))
            start = 0
            for j, other in enumerate(others):
                take = base + (1 if j < extra else 0)
                yg[chosen[start : start + take]] = other
                start += take
            kind[chosen] = KIND_MISLABELED

        m_meas = int(math.floor(scenario.eps_meas * cls.n))
        if m_meas > 0:
            candidates = np.flatnonzero(kind == KIND_CLEAN)
            if candidates.shape[0] < m_meas:
                raise ConfigError(f"class {g}: not enough clean rows left to replace")
            chosen = rng.choice(candidates, size=m_meas, replace=False)
            spec = cls.contamination
            center = np.array(spec.center)
            if center.shape[0] != cls.p:
                raise ConfigError(f"class {g}: contamination center has wrong dimension")
            if spec.kind == "point":
                Xg[chosen] = center
            else:
                scale = spec.scale if spec.kind == "cluster" else 1.0
                noise_ls = LocationScatter.from_sigma(center, scale * np.array(cls.sigma))
                Xg[chosen] = mvn_sample(rng, noise_ls, m_meas)
            kind[chosen] = KIND_REPLACED

        xs.append(Xg)
        ys.append(yg)
        origins.append(np.full(cls.n, g, dtype=np.int64))
        kinds.append(kind)
    X = np.concatenate(xs, axis=0)
    y = np.concatenate(ys)
    tags = Tags(origin=np.concatenate(origins), given=y.copy(), kind=np.concatenate(kinds))
    return X, y, tags


@dataclass(frozen=True)
class ExtendedConfusion:
    """Row-stochastic confusion over provenance subclasses.

    Row keys are ``(origin, given)`` pairs where ``given`` is 0 for
    replaced (measurement-noise) rows; columns are the predicted classes
    1..G followed by the outlier class 0.
    """

    row_keys: tuple
    rates: np.ndarray
    row_counts: np.ndarray
    n_classes: int
    rep_count: int = 1

    def __post_init__(self):
        self.rates.setflags(write=False)
        self.row_counts.setflags(write=False)

    def rate(self, origin: int, given: int, predicted: int) -> float:
        """Rate in row (origin, given) for a predicted class (0 = outlier)."""
        try:
            r = self.row_keys.index((origin, given))
        except ValueError:
            raise DataError(f"no subclass row ({origin}, {given})") from None
        col = self.n_classes if predicted == 0 else predicted - 1
        return float(self.rates[r, col])


def extended_confusion(pred_labels, tags: Tags, n_classes: int) -> ExtendedConfusion:
    """Bucket predictions by provenance subclass.

    Rows ordered by origin class, then by given label with replaced rows
    (key 0) first; every row is normalized by its own count.
    """
    pred = np.asarray(pred_labels, dtype=np.int64)
    if pred.shape[0] != len(tags):
        raise DimensionMismatch("predictions and tags have different lengths")
    G = int(n_classes)
    given_key = np.where(tags.kind == KIND_REPLACED, 0, tags.given)
    keys = sorted(set(zip(tags.origin.tolist(), given_key.tolist())))
    rates = np.empty((len(keys), G + 1))
    counts = np.empty(len(keys), dtype=np.int64)
    for r, (origin, given) in enumerate(keys):
        mask = (tags.origin == origin) & (given_key == given)
        counts[r] = int(mask.sum())
        sub = pred[mask]
        for g in range(1, G + 1):
            rates[r, g - 1] = np.count_nonzero(sub == g) / counts[r]
        rates[r, G] = np.count_nonzero(sub == 0) / counts[r]
    return ExtendedConfusion(
        row_keys=tuple(keys), rates=rates, row_counts=counts, n_classes=G, rep_count=1
    )


def average_confusions(confusions) -> ExtendedConfusion:
    """Element-wise mean over replications (row keys must agree)."""
    confusions = list(confusions)
    if not confusions:
        raise DataError("no confusion matrices to average")
    first = confusions[0]
    for c in confusions[1:]:
        if c.row_keys != first.row_keys or c.n_classes != first.n_classes:
            raise DataError("confusion matrices have mismatched subclass rows")
    rates = np.mean([c.rates for c in confusions], axis=0)
    counts = np.mean([c.row_counts for c in confusions], axis=0)
    return ExtendedConfusion(
        row_keys=first.row_keys,
        rates=rates,
        row_counts=counts,
        n_classes=first.n_classes,
        rep_count=sum(c.rep_count for c in confusions),
    )


def kl_metric(sigma_hat, sigma_true) -> float:
    """Gaussian KL divergence of N(0, sigma_hat) from N(0, sigma_true):
    ``trace(hat inv(true)) - p - ln det(hat inv(true))``.  Zero iff equal."""
    _, logdet_hat, _ = spd_cholesky(sigma_hat, name="sigma_hat")
    _, logdet_true, precision_true = spd_cholesky(sigma_true, name="sigma_true")
    hat = np.asarray(sigma_hat, dtype=np.float64)
    p = hat.shape[0]
    trace = float(np.sum(hat * precision_true))
    return trace - p - (logdet_hat - logdet_true)


def alpha_metric(rd_own, tags: Tags, g: int, cutoff: float) -> float:
    """Flagging rate for class ``g``: rows with given label g whose own-class
    distance exceeds ``cutoff``, relative to the planted noise carrying
    that label.  Values near 1 mean the noise (and little else) is caught.
    """
    rd_own = np.asarray(rd_own, dtype=np.float64)
    if rd_own.shape[0] != len(tags):
        raise DimensionMismatch("rd_own and tags have different lengths")
    mask = tags.given == g
    noisy = int(np.count_nonzero(mask & (tags.kind != KIND_CLEAN)))
    if noisy == 0:
        raise ZeroNoise(f"class {g} carries no planted noise")
    flagged = int(np.count_nonzero(mask & (rd_own > cutoff)))
    return flagged / noisy


@dataclass(frozen=True)
class MethodReport:
    mode: str
    confusion: ExtendedConfusion
    kl_mean: np.ndarray
    kl_sd: np.ndarray
    det_mean: np.ndarray
    det_sd: np.ndarray
    alpha_mean: np.ndarray | None
    alpha_sd: np.ndarray | None
    seconds: tuple


@dataclass(frozen=True)
class StudyReport:
    scenario: Scenario
    reps: int
    h_frac: float
    blocks: int | str
    methods: tuple  # of MethodReport

    def method(self, mode: str) -> MethodReport:
        for m in self.methods:
            if m.mode == mode:
                return m
        raise DataError(f"no report for method {mode!r}")


def _spread(values: np.ndarray) -> np.ndarray:
    if values.shape[0] < 2:
        return np.zeros(values.shape[1:])
    return values.std(axis=0, ddof=1)


def run_study(
    scenario: Scenario,
    reps: int = 5,
    methods: tuple = ("robust", "classical"),
    *,
    h_frac: float = 0.5,
    blocks: int | str = 4,
    outlier_quantile: float = 0.99,
) -> StudyReport:
    """Run ``reps`` replications of the scenario for each method.

    Replication r draws its data from substream r of the scenario seed
    and hands the fit another substream-derived seed, so the study is
    reproducible end to end and replications are independent.
    """
    if reps < 1:
        raise ConfigError(f"reps must be positive, got {reps}")
    for mode in methods:
        if mode not in ("robust", "classical"):
            raise ConfigError(f"unknown method {mode!r}")
    G = scenario.n_classes
    true_sigmas = [np.array(cls.sigma) for cls in scenario.classes]
    has_noise = scenario.eps_label + scenario.eps_meas > 0.0

    per_method: dict[str, dict[str, list]] = {
        mode: {"confusion": [], "kl": [], "det": [], "alpha": [], "seconds": []} for mode in methods
    }
    for rep in range(reps):
        rep_ss = np.random.SeedSequence(scenario.seed, spawn_key=(rep,))
        data_ss, fit_ss = rep_ss.spawn(2)
        X, y, tags = generate(scenario, np.random.default_rng(data_ss))
        fit_seed = int(fit_ss.generate_state(1)[0])
        for mode in methods:
            start = time.perf_counter()
            model = fit_qda(
                X,
                y,
                mode=mode,
                h_frac=h_frac,
                blocks=blocks,
                seed=fit_seed,
                outlier_quantile=outlier_quantile,
            )
            labels, _, rd, _ = classify_rows(model, X)
            elapsed = time.perf_counter() - start
            acc = per_method[mode]
            acc["confusion"].append(extended_confusion(labels, tags, G))
            acc["kl"].append(
                [kl_metric(model.classes[g].loc_scat.sigma, true_sigmas[g]) for g in range(G)]
            )
            acc["det"].append([math.exp(model.classes[g].loc_scat.log_det) for g in range(G)])
            if has_noise:
                rd_own = rd[np.arange(rd.shape[0]), y - 1]
                acc["alpha"].append(
                    [alpha_metric(rd_own, tags, g, model.outlier_cutoff) for g in range(1, G + 1)]
                )
            acc["seconds"].append(elapsed)

    reports = []
    for mode in methods:
        acc = per_method[mode]
        kl = np.asarray(acc["kl"])
        det = np.asarray(acc["det"])
        alpha = np.asarray(acc["alpha"]) if has_noise else None
        reports.append(
            MethodReport(
                mode=mode,
                confusion=average_confusions(acc["confusion"]),
                kl_mean=kl.mean(axis=0),
                kl_sd=_spread(kl),
                det_mean=det.mean(axis=0),
                det_sd=_spread(det),
                alpha_mean=None if alpha is None else alpha.mean(axis=0),
                alpha_sd=None if alpha is None else _spread(alpha),
                seconds=tuple(acc["seconds"]),
            )
        )
    return StudyReport(
        scenario=scenario, reps=reps, h_frac=h_frac, blocks=blocks, methods=tuple(reports)
    )


# ---------------------------------------------------------------------------
# Reference scenario presets (three well-separated Gaussian classes in p = 5).

_PRESET_MU = ((6, 0, 0, 0, 0), (0, 0, 6, 0, 0), (0, 0, 0, 0, 6))
_PRESET_SIGMA_DIAG = ((1, 1, 1, 1, 1), (1, 2, 3, 4, 5), (1, 1, 1, 5, 10))
_PRESET_N = (250_000, 350_000, 400_000)
_PRESET_CONTAMINATION = (
    Contamination(kind="cluster", center=(-6, 0, 0, 0, 0), scale=0.1),
    Contamination(kind="point", center=(0, 0, -15, 0, 20)),
    Contamination(kind="shift", center=(14, 0, 0, 0, -6)),
)
_PRESET_EPS = {
    "clean": (0.0, 0.0),
    "label": (0.2, 0.0),
    "measurement": (0.0, 0.2),
    "both": (0.1, 0.1),
}


def preset_names() -> tuple:
    return tuple(sorted(_PRESET_EPS))


def preset_scenario(name: str, *, scale: float = 0.01, seed: int = 0) -> Scenario:
    """One of the built-in contamination setups, size-scaled.

    ``scale=0.01`` turns the reference class sizes (250k/350k/400k) into a
    desk-scale 2500/3500/4000 dataset.
    """
    if name not in _PRESET_EPS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(preset_names())}")
    if scale <= 0.0:
        raise ConfigError(f"scale must be positive, got {scale!r}")
    eps_label, eps_meas = _PRESET_EPS[name]
    classes = tuple(
        ClassSpec(
            n=max(1, int(round(n * scale))),
            mu=mu,
            sigma=sigma_diag,
            contamination=contam,
        )
        for n, mu, sigma_diag, contam in zip(
            _PRESET_N, _PRESET_MU, _PRESET_SIGMA_DIAG, _PRESET_CONTAMINATION
        )
    )
    return Scenario(classes=classes, eps_label=eps_label, eps_meas=eps_meas, seed=seed, name=name)


# ---------------------------------------------------------------------------
# Scenario file format: flat "key = value" lines, # comments, 1-based
# class prefixes.  See parse_scenario for the key list.

def _fmt_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def format_scenario(scenario: Scenario) -> str:
    lines = [
        "# robust-qda scenario",
        f"name = {scenario.name}",
        f"dims = {scenario.p}",
        f"classes = {scenario.n_classes}",
        f"seed = {scenario.seed}",
        f"eps_label = {scenario.eps_label!r}",
        f"eps_meas = {scenario.eps_meas!r}",
    ]
    for g, cls in enumerate(scenario.classes, start=1):
        lines.append(f"class{g}.n = {cls.n}")
        lines.append(f"class{g}.mu = {_fmt_floats(cls.mu)}")
        sigma = np.array(cls.sigma)
        if np.array_equal(sigma, np.diag(np.diag(sigma))):
            lines.append(f"class{g}.sigma_diag = {_fmt_floats(np.diag(sigma))}")
        else:
            lines.append(f"class{g}.sigma_rows = {_fmt_floats(sigma.ravel())}")
        if cls.contamination is not None:
            lines.append(f"class{g}.noise_kind = {cls.contamination.kind}")
            lines.append(f"class{g}.noise_center = {_fmt_floats(cls.contamination.center)}")
            if cls.contamination.kind == "cluster":
                lines.append(f"class{g}.noise_scale = {cls.contamination.scale!r}")
    return "\n".join(lines) + "\n"


def parse_scenario(text: str) -> Scenario:
    """Parse the flat key-value scenario format.

    Keys: ``dims``, ``classes``, ``seed``, ``eps_label``, ``eps_meas``,
    ``name`` (optional), and per class ``classK.n``, ``classK.mu``,
    ``classK.sigma_diag`` or ``classK.sigma_rows`` (row-major p*p values),
    plus optional ``classK.noise_kind`` / ``classK.noise_center`` /
    ``classK.noise_scale``.
    """
    pairs: dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in pairs:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        pairs[key] = value.strip()

    def take(key: str, default=None) -> str:
        if key in pairs:
            return pairs.pop(key)
        if default is not None:
            return default
        raise ConfigError(f"missing required key {key!r}")

    def floats(text_value: str, expect: int | None = None, *, key: str = "") -> tuple:
        try:
            values = tuple(float(v) for v in text_value.split())
        except ValueError:
            raise ConfigError(f"{key}: expected numbers, got {text_value!r}") from None
        if expect is not None and len(values) != expect:
            raise ConfigError(f"{key}: expected {expect} values, got {len(values)}")
        return values

    try:
        p = int(take("dims"))
        G = int(take("classes"))
        seed = int(take("seed", "0"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    name = take("name", "custom")
    eps_label = floats(take("eps_label", "0"), 1, key="eps_label")[0]
    eps_meas = floats(take("eps_meas", "0"), 1, key="eps_meas")[0]
    classes = []
    for g in range(1, G + 1):
        prefix = f"class{g}."
        try:
            n_g = int(take(prefix + "n"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        mu = floats(take(prefix + "mu"), p, key=prefix + "mu")
        if prefix + "sigma_diag" in pairs:
            sigma = np.diag(floats(pairs.pop(prefix + "sigma_diag"), p, key=prefix + "sigma_diag"))
        elif prefix + "sigma_rows" in pairs:
            flat = floats(pairs.pop(prefix + "sigma_rows"), p * p, key=prefix + "sigma_rows")
            sigma = np.array(flat).reshape(p, p)
        else:
            raise ConfigError(f"class {g}: needs sigma_diag or sigma_rows")
        contamination = None
        if prefix + "noise_kind" in pairs:
            kind = pairs.pop(prefix + "noise_kind")
            center = floats(take(prefix + "noise_center"), p, key=prefix + "noise_center")
            scale = floats(take(prefix + "noise_scale", "1"), 1, key=prefix + "noise_scale")[0]
            contamination = Contamination(kind=kind, center=center, scale=scale)
        classes.append(ClassSpec(n=n_g, mu=mu, sigma=sigma, contamination=contamination))
    if pairs:
        raise ConfigError(f"unknown keys: {', '.join(sorted(pairs))}")
    return Scenario(
        classes=tuple(classes), eps_label=eps_label, eps_meas=eps_meas, seed=seed, name=name
    )


# ---------------------------------------------------------------------------
# Two-class demonstration data: mild overlap, a few swapped labels, and two
# planted outlier clusters that lean toward class 1.

def two_class_demo(seed: int = 0, *, n1: int = 80, n2: int = 100, swaps=(4, 4), planted=(5, 8)):
    """Bivariate two-class dataset with label swaps and planted outliers.

    Returns ``(X, y, info)`` where ``info`` records the affected row
    indices: ``swapped_1``/``swapped_2`` (rows of class 1/2 that received
    the other label) and ``planted_1``/``planted_2`` (rows replaced by
    outliers, keeping their label).  The planted clusters sit closer to
    class 1 than class 2 but outside the 0.99 ellipsoid of both.
    """
    if swaps[0] + planted[0] > n1 or swaps[1] + planted[1] > n2:
        raise ConfigError("swaps + planted outliers exceed a class size")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    ls1 = LocationScatter.from_sigma([0.0, 0.0], [[1.0, 0.5], [0.5, 1.2]])
    ls2 = LocationScatter.from_sigma([3.8, 2.0], [[1.3, -0.4], [-0.4, 0.9]])
    X = np.vstack([mvn_sample(rng, ls1, n1), mvn_sample(rng, ls2, n2)])
    y = np.concatenate([np.full(n1, 1, dtype=np.int64), np.full(n2, 2, dtype=np.int64)])

    rows1 = np.arange(n1)
    rows2 = n1 + np.arange(n2)
    swapped_1 = np.sort(rng.choice(rows1, size=swaps[0], replace=False))
    swapped_2 = np.sort(rng.choice(rows2, size=swaps[1], replace=False))
    y[swapped_1] = 2
    y[swapped_2] = 1

    clean1 = np.setdiff1d(rows1, swapped_1)
    clean2 = np.setdiff1d(rows2, swapped_2)
    planted_1 = np.sort(rng.choice(clean1, size=planted[0], replace=False))
    planted_2 = np.sort(rng.choice(clean2, size=planted[1], replace=False))
    tight = LocationScatter.from_sigma([0.0, 0.0], 0.05 * np.eye(2))
    X[planted_1] = np.array([-4.0, -6.0]) + mvn_sample(rng, tight, planted[0])
    X[planted_2] = np.array([-4.0, 1.5]) + mvn_sample(rng, tight, planted[1])

    info = {
        "swapped_1": swapped_1,
        "swapped_2": swapped_2,
        "planted_1": planted_1,
        "planted_2": planted_2,
    }
    return X, y, info


# ---------------------------------------------------------------------------
# Report files.  Timings are kept out of these on purpose so that reruns
# with the same seed are byte-identical; the CLI prints them separately.

def _csv_num(x: float) -> str:
    return f"{x:.9g}"


def _confusion_csv(conf: ExtendedConfusion) -> str:
    G = conf.n_classes
    header = ["origin", "given"] + [f"pred_{g}" for g in range(1, G + 1)] + ["pred_0", "rows"]
    lines = [",".join(header)]
    for r, (origin, given) in enumerate(conf.row_keys):
        cells = [str(origin), str(given)]
        cells += [_csv_num(conf.rates[r, c]) for c in range(G + 1)]
        cells.append(_csv_num(float(conf.row_counts[r])))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _metrics_csv(report: MethodReport, G: int) -> str:
    header = "class,kl_mean,kl_sd,det_mean,det_sd,alpha_mean,alpha_sd"
    lines = [header]
    for g in range(G):
        cells = [
            str(g + 1),
            _csv_num(report.kl_mean[g]),
            _csv_num(report.kl_sd[g]),
            _csv_num(report.det_mean[g]),
            _csv_num(report.det_sd[g]),
        ]
        if report.alpha_mean is None:
            cells += ["", ""]
        else:
            cells += [_csv_num(report.alpha_mean[g]), _csv_num(report.alpha_sd[g])]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _text_report(study: StudyReport) -> str:
    sc = study.scenario
    G = sc.n_classes
    out = [
        f"scenario: {sc.name}",
        f"  classes={G} dims={sc.p} n={sc.n_total} seed={sc.seed}",
        f"  eps_label={sc.eps_label:g} eps_meas={sc.eps_meas:g}",
        f"  reps={study.reps} h_frac={study.h_frac:g} blocks={study.blocks}",
        "",
    ]
    for report in study.methods:
        out.append(f"method: {report.mode}")
        out.append("  extended confusion (row: origin/given, column: predicted)")
        head = "    origin given |" + "".join(f"  pred {g}" for g in range(1, G + 1)) + "  pred 0    rows"
        out.append(head)
        for r, (origin, given) in enumerate(report.confusion.row_keys):
            cells = "".join(f"  {report.confusion.rates[r, c]:6.3f}" for c in range(G + 1))
            out.append(f"    {origin:6d} {given:5d} |{cells}  {report.confusion.row_counts[r]:8.1f}")
        out.append("  per-class metrics (mean over reps, sd in parentheses)")
        out.append("    class        KL                det             alpha")
        for g in range(G):
            kl = f"{report.kl_mean[g]:.4g} ({report.kl_sd[g]:.2g})"
            det = f"{report.det_mean[g]:.5g} ({report.det_sd[g]:.2g})"
            if report.alpha_mean is None:
                alpha = "-"
            else:
                alpha = f"{report.alpha_mean[g]:.3f} ({report.alpha_sd[g]:.2g})"
            out.append(f"    {g + 1:5d}  {kl:>16s}  {det:>16s}  {alpha:>14s}")
        out.append("")
    return "\n".join(out)


def write_study_report(study: StudyReport, outdir) -> list:
    """Write scenario, confusion, metrics, and summary files; returns paths."""
    outdir = Path(outdir)
    written = [write_text_atomic(outdir / "scenario.txt", format_scenario(study.scenario))]
    for report in study.methods:
        written.append(
            write_text_atomic(outdir / f"confusion_{report.mode}.csv", _confusion_csv(report.confusion))
        )
        written.append(
            write_text_atomic(
                outdir / f"metrics_{report.mode}.csv", _metrics_csv(report, study.scenario.n_classes)
            )
        )
    written.append(write_text_atomic(outdir / "report.txt", _text_report(study)))
    return written
