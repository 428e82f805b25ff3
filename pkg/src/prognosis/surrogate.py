"""Surrogate model families: polynomial regression, Moving Least Squares, Kriging.

All families normalize inputs onto the unit hypercube through the design
bounds, include a constant baseline, and are trained/evaluated through the
same two entry points. Prediction accepts either a DesignMatrix or a raw
array in original units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from .errors import (
    ArgumentError,
    ConditioningError,
    DimensionError,
    SingularFitError,
)
from .sampling import Bounds, DesignMatrix, output_values

FAMILIES = ("polynomial", "mls", "kriging")
BASES = ("linear", "quadratic")
ANISOTROPY = ("isotropic", "anisotropic")

# MLS weight shape: w(r) = exp(-1/alpha^2) ~ 2e-3 at the cutoff radius, so the
# truncation step stays negligible.
MLS_WEIGHT_SHAPE = 0.4

KRIGING_THETA_LOG10_RANGE = (-2.0, 2.0)  # length-scale box per normalized dimension
KRIGING_GRID_STARTS = 16
KRIGING_NUGGET_MIN = 1e-10
KRIGING_NUGGET_MAX = 1e-4

MODEL_SCHEMA = "prognosis-model/1"

_PREDICT_CHUNK = 2048


@dataclass(frozen=True)
class ModelSpec:
    """Configuration of one surrogate candidate.

    active_inputs are 0-based design-column indices (None = all columns).
    The MLS radius is a fraction of the normalized input-space diagonal of
    the active columns.
    """

    family: str
    basis: str = "linear"
    radius: float = 0.3
    anisotropy: str = "isotropic"
    active_inputs: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ArgumentError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.family in ("polynomial", "mls") and self.basis not in BASES:
            raise ArgumentError(f"unknown basis {self.basis!r}; choose from {BASES}")
        if self.family == "mls" and not self.radius > 0.0:
            raise ArgumentError("mls radius must be positive")
        if self.family == "kriging" and self.anisotropy not in ANISOTROPY:
            raise ArgumentError(f"unknown anisotropy {self.anisotropy!r}")
        if self.active_inputs is not None:
            active = tuple(sorted(set(int(i) for i in self.active_inputs)))
            if not active:
                raise ArgumentError("active_inputs must be non-empty")
            if active[0] < 0:
                raise ArgumentError("active_inputs must be non-negative column indices")
            object.__setattr__(self, "active_inputs", active)

    @property
    def label(self) -> str:
        if self.family == "polynomial":
            return f"{self.basis.capitalize()} Polynomial"
        if self.family == "mls":
            return f"{self.basis.capitalize()} MLS"
        return f"{self.anisotropy.capitalize()} Kriging"


def basis_size(basis: str, m: int) -> int:
    """Number of polynomial basis terms: constant + linear (+ squares and
    pairwise interactions for the quadratic basis)."""
    if basis == "linear":
        return 1 + m
    return 1 + 2 * m + m * (m - 1) // 2


def _basis_matrix(x: np.ndarray, basis: str) -> np.ndarray:
    x = np.atleast_2d(x)
    n, m = x.shape
    cols = [np.ones((n, 1)), x]
    if basis == "quadratic":
        cols.append(x * x)
        for i in range(m):
            for j in range(i + 1, m):
                cols.append((x[:, i] * x[:, j])[:, None])
    return np.hstack(cols)


@dataclass(frozen=True)
class TrainedSurrogate:
    """A fitted surrogate; immutable, safe to share across threads."""

    spec: ModelSpec
    bounds: Bounds
    active: tuple[int, ...]
    support_x: np.ndarray  # normalized, active columns only
    support_y: np.ndarray
    params: dict = field(repr=False)

    @property
    def input_dim(self) -> int:
        return self.bounds.dim

    def predict(self, points) -> np.ndarray:
        """Evaluate the surrogate at points given in original units."""
        if isinstance(points, DesignMatrix):
            raw = points.values
        else:
            raw = np.asarray(points, dtype=float)
            if raw.ndim == 1:
                raw = raw.reshape(1, -1) if raw.size == self.input_dim else raw.reshape(-1, 1)
        if raw.ndim != 2 or raw.shape[1] != self.input_dim:
            raise DimensionError(
                f"prediction points have {raw.shape[-1]} columns, model expects {self.input_dim}"
            )
        xn = self.bounds.normalize(raw)[:, list(self.active)]
        if self.spec.family == "polynomial":
            return _predict_polynomial(self, xn)
        if self.spec.family == "mls":
            return _predict_mls(self, xn)
        return _predict_kriging(self, xn)


def _resolve_active(spec: ModelSpec, total_cols: int) -> tuple[int, ...]:
    if spec.active_inputs is None:
        return tuple(range(total_cols))
    if spec.active_inputs[-1] >= total_cols:
        raise DimensionError(
            f"active input {spec.active_inputs[-1]} out of range for {total_cols} columns"
        )
    return spec.active_inputs


def train(spec: ModelSpec, design: DesignMatrix, y) -> TrainedSurrogate:
    """Fit one surrogate of the requested family to the support points."""
    yv = output_values(y)
    if yv.size != design.rows:
        raise DimensionError(f"{yv.size} outputs for {design.rows} design rows")
    active = _resolve_active(spec, design.cols)
    xn = design.normalized()[:, list(active)]
    n, m = xn.shape

    if spec.family == "polynomial":
        k = basis_size(spec.basis, m)
        if n < k:
            raise ArgumentError(f"polynomial/{spec.basis} needs n >= {k}, got n={n}")
        params = _fit_polynomial(xn, yv, spec.basis)
    elif spec.family == "mls":
        if n < 3:
            raise ArgumentError(f"mls needs n >= 3, got n={n}")
        params = _fit_mls(xn, yv, spec)
    else:
        if n < 3:
            raise ArgumentError(f"kriging needs n >= 3, got n={n}")
        params = _fit_kriging(xn, yv, spec.anisotropy == "anisotropic")

    return TrainedSurrogate(
        spec=spec, bounds=design.bounds, active=active,
        support_x=xn, support_y=yv, params=params,
    )


def predict(model: TrainedSurrogate, points) -> np.ndarray:
    return model.predict(points)


# ---------------------------------------------------------------------------
# Polynomial regression (ordinary least squares)
# ---------------------------------------------------------------------------

def _fit_polynomial(xn: np.ndarray, y: np.ndarray, basis: str) -> dict:
    a = _basis_matrix(xn, basis)
    beta, _, rank, _ = np.linalg.lstsq(a, y, rcond=None)
    if rank < a.shape[1]:
        raise SingularFitError(
            f"basis matrix rank {rank} below {a.shape[1]} terms (collinear inputs?)"
        )
    return {"beta": beta}


def _predict_polynomial(model: TrainedSurrogate, xn: np.ndarray) -> np.ndarray:
    return _basis_matrix(xn, model.spec.basis) @ model.params["beta"]


def polynomial_hat_diagonal(model: TrainedSurrogate, design: DesignMatrix) -> np.ndarray:
    """Leverages h_ii of the OLS fit; used by the closed-form LOO shortcut."""
    if model.spec.family != "polynomial":
        raise ArgumentError("hat diagonal is only defined for polynomial surrogates")
    xn = design.normalized()[:, list(model.active)]
    a = _basis_matrix(xn, model.spec.basis)
    q, _ = np.linalg.qr(a, mode="reduced")
    return np.einsum("ij,ij->i", q, q)


# ---------------------------------------------------------------------------
# Moving Least Squares
# ---------------------------------------------------------------------------

def _fit_mls(xn: np.ndarray, y: np.ndarray, spec: ModelSpec) -> dict:
    radius_eff = spec.radius * math.sqrt(xn.shape[1])
    return {"radius_eff": radius_eff, "trend": float(y.mean())}


def _predict_mls(model: TrainedSurrogate, xn: np.ndarray) -> np.ndarray:
    """Per-point weighted least squares.

    Three coverage regimes: enough supports inside the radius -> standard
    truncated-weight WLS; some but too few -> the neighborhood grows minimally
    to the nearest n_terms supports; none at all -> the constant trend (the
    model has no local information there).
    """
    sup = model.support_x
    yv = model.support_y
    basis = model.spec.basis
    r = model.params["radius_eff"]
    trend = model.params["trend"]
    n_terms = basis_size(basis, sup.shape[1])
    inv_h2 = 1.0 / (MLS_WEIGHT_SHAPE * r) ** 2

    out = np.empty(xn.shape[0])
    for start in range(0, xn.shape[0], _PREDICT_CHUNK):
        block = xn[start:start + _PREDICT_CHUNK]
        d2 = ((block[:, None, :] - sup[None, :, :]) ** 2).sum(axis=2)
        for i in range(block.shape[0]):
            inside = np.flatnonzero(d2[i] <= r * r)
            if inside.size == 0:
                out[start + i] = trend
                continue
            if inside.size < min(n_terms, sup.shape[0]):
                k = min(n_terms, sup.shape[0])
                inside = np.argpartition(d2[i], k - 1)[:k]
            d2_loc = d2[i, inside]
            # weights are relative; shifting by the nearest distance avoids
            # underflow without changing the weighted solution
            w = np.exp(-(d2_loc - d2_loc.min()) * inv_h2)
            sw = np.sqrt(w)
            a = _basis_matrix(sup[inside], basis) * sw[:, None]
            beta, *_ = np.linalg.lstsq(a, yv[inside] * sw, rcond=None)
            out[start + i] = float((_basis_matrix(block[i:i + 1], basis) @ beta)[0])
    return out


# ---------------------------------------------------------------------------
# Ordinary Kriging with squared-exponential correlation
# ---------------------------------------------------------------------------

def _chol_with_nugget(r: np.ndarray, max_nugget: float = KRIGING_NUGGET_MAX) -> tuple[np.ndarray, float]:
    """Cholesky of R + nugget*I.

    The plain matrix is tried first (an ordinary Kriging model interpolates
    exactly when it factors); on failure the nugget escalates tenfold from
    KRIGING_NUGGET_MIN up to max_nugget.
    """
    nugget = 0.0
    eye = np.eye(r.shape[0])
    while True:
        try:
            return cholesky(r if nugget == 0.0 else r + nugget * eye, lower=True), nugget
        except LinAlgError:
            nugget = KRIGING_NUGGET_MIN if nugget == 0.0 else nugget * 10.0
            if nugget > max_nugget:
                raise ConditioningError(
                    f"correlation matrix stayed indefinite at nugget cap {max_nugget:g}"
                ) from None


# During the length-scale search only nugget-light candidates are admissible:
# a theta whose correlation matrix needs heavy regularization describes a
# near-singular model whose likelihood is not comparable, and whose
# predictions would no longer interpolate.
KRIGING_SEARCH_NUGGET_MAX = 1e-8


def _kriging_gls(r: np.ndarray, y: np.ndarray, max_nugget: float = KRIGING_NUGGET_MAX) -> dict:
    """Constant-trend GLS pieces for a fixed correlation matrix."""
    n = y.size
    chol, nugget = _chol_with_nugget(r, max_nugget)
    rhs = np.column_stack([y, np.ones(n)])
    z = solve_triangular(chol, rhs, lower=True)
    zy, z1 = z[:, 0], z[:, 1]
    mu = float((z1 @ zy) / (z1 @ z1))
    rho = zy - mu * z1
    sigma2 = float(rho @ rho) / n
    logdet = 2.0 * float(np.log(np.diag(chol)).sum())
    nll = n * math.log(max(sigma2, 1e-300)) + logdet
    return {"chol": chol, "nugget": nugget, "mu": mu, "sigma2": sigma2, "nll": nll}


def _fit_kriging(xn: np.ndarray, y: np.ndarray, anisotropic: bool) -> dict:
    n, m = xn.shape
    diff2 = (xn[:, None, :] - xn[None, :, :]) ** 2  # (n, n, m)
    ln10 = math.log(10.0)

    def correlation(log10_theta: np.ndarray) -> np.ndarray:
        theta = 10.0 ** np.asarray(log10_theta, dtype=float)
        if theta.size == 1:
            s = diff2.sum(axis=2) / theta[0] ** 2
        else:
            s = diff2 @ (1.0 / theta**2)
        return np.exp(-s)

    def objective(log10_theta: np.ndarray) -> float:
        try:
            return _kriging_gls(correlation(log10_theta), y, KRIGING_SEARCH_NUGGET_MAX)["nll"]
        except ConditioningError:
            return np.inf

    def objective_with_grad(log10_theta: np.ndarray):
        # dNLL/dt_k = tr(R^-1 dR/dt_k) - alpha' dR/dt_k alpha / sigma2; the
        # profiled trend contributes nothing (envelope condition).
        theta = 10.0 ** np.asarray(log10_theta, dtype=float)
        r_mat = correlation(log10_theta)
        try:
            gls = _kriging_gls(r_mat, y, KRIGING_SEARCH_NUGGET_MAX)
        except ConditioningError:
            return np.inf, np.zeros(theta.size)
        chol = gls["chol"]
        alpha = cho_solve((chol, True), y - gls["mu"])
        r_inv = cho_solve((chol, True), np.eye(n))
        sigma2 = max(gls["sigma2"], 1e-300)
        grad = np.empty(theta.size)
        for k in range(theta.size):
            d2k = diff2.sum(axis=2) if theta.size == 1 else diff2[:, :, k]
            dr = r_mat * (2.0 * ln10 / theta[k] ** 2) * d2k
            grad[k] = float((r_inv * dr).sum() - (alpha @ dr @ alpha) / sigma2)
        return gls["nll"], grad

    lo, hi = KRIGING_THETA_LOG10_RANGE
    grid = np.linspace(lo, hi, KRIGING_GRID_STARTS)
    n_theta = m if anisotropic else 1
    grid_points = [np.full(n_theta, g) for g in grid]
    grid_nll = np.array([objective(p) for p in grid_points])
    best_idx = int(np.argmin(grid_nll))
    best_theta = grid_points[best_idx]
    best_nll = float(grid_nll[best_idx])
    if not np.isfinite(best_nll):
        raise ConditioningError("no admissible length-scale on the search grid")

    if anisotropic:
        res = optimize.minimize(
            objective_with_grad, best_theta, jac=True, method="L-BFGS-B",
            bounds=[(lo, hi)] * n_theta, options={"maxiter": 60},
        )
        if np.isfinite(res.fun) and res.fun < best_nll:
            best_theta, best_nll = np.asarray(res.x, dtype=float), float(res.fun)
    else:
        # refine within the bracket around the best grid cell
        step = grid[1] - grid[0]
        res = optimize.minimize_scalar(
            lambda t: objective(np.array([t])),
            bounds=(max(lo, grid[best_idx] - step), min(hi, grid[best_idx] + step)),
            method="bounded", options={"xatol": 1e-3},
        )
        if np.isfinite(res.fun) and res.fun < best_nll:
            best_theta, best_nll = np.array([float(res.x)]), float(res.fun)

    r = correlation(best_theta)
    gls = _kriging_gls(r, y)
    alpha = cho_solve((gls["chol"], True), y - gls["mu"])
    theta = 10.0 ** np.asarray(best_theta, dtype=float)
    if theta.size == 1:
        theta = np.full(m, theta[0])
    return {
        "theta": theta,
        "mu": gls["mu"],
        "sigma2": gls["sigma2"],
        "nugget": gls["nugget"],
        "nll": gls["nll"],
        "alpha": alpha,
    }


def _predict_kriging(model: TrainedSurrogate, xn: np.ndarray) -> np.ndarray:
    sup = model.support_x
    theta = model.params["theta"]
    mu = model.params["mu"]
    alpha = model.params["alpha"]
    inv_t2 = 1.0 / theta**2
    out = np.empty(xn.shape[0])
    for start in range(0, xn.shape[0], _PREDICT_CHUNK):
        block = xn[start:start + _PREDICT_CHUNK]
        s = ((block[:, None, :] - sup[None, :, :]) ** 2) @ inv_t2
        out[start:start + block.shape[0]] = mu + np.exp(-s) @ alpha
    return out


def kriging_nll(model: TrainedSurrogate, log10_theta: np.ndarray) -> float:
    """Concentrated negative log-likelihood at a given log10 length-scale
    vector, for the trained model's own supports."""
    if model.spec.family != "kriging":
        raise ArgumentError("likelihood is only defined for kriging surrogates")
    xn = model.support_x
    theta = 10.0 ** np.atleast_1d(np.asarray(log10_theta, dtype=float))
    if theta.size == 1:
        theta = np.full(xn.shape[1], theta[0])
    diff2 = (xn[:, None, :] - xn[None, :, :]) ** 2
    r = np.exp(-(diff2 @ (1.0 / theta**2)))
    return _kriging_gls(r, model.support_y)["nll"]


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def to_json_dict(model: TrainedSurrogate) -> dict:
    """Versioned JSON document for CLI round-tripping."""
    spec = model.spec
    return {
        "schema": MODEL_SCHEMA,
        "spec": {
            "family": spec.family,
            "basis": spec.basis,
            "radius": spec.radius,
            "anisotropy": spec.anisotropy,
            "active_inputs": list(model.active),
        },
        "bounds": {"lower": model.bounds.lower.tolist(), "upper": model.bounds.upper.tolist()},
        "support_x": model.support_x.tolist(),
        "support_y": model.support_y.tolist(),
        "params": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                   for k, v in model.params.items() if k != "chol"},
    }


def from_json_dict(doc: dict) -> TrainedSurrogate:
    if doc.get("schema") != MODEL_SCHEMA:
        raise ArgumentError(f"unsupported model schema {doc.get('schema')!r}")
    spec_doc = doc["spec"]
    spec = ModelSpec(
        family=spec_doc["family"],
        basis=spec_doc.get("basis", "linear"),
        radius=spec_doc.get("radius", 0.3),
        anisotropy=spec_doc.get("anisotropy", "isotropic"),
        active_inputs=tuple(spec_doc["active_inputs"]),
    )
    bounds = Bounds(np.asarray(doc["bounds"]["lower"]), np.asarray(doc["bounds"]["upper"]))
    params = {
        k: (np.asarray(v, dtype=float) if isinstance(v, list) else v)
        for k, v in doc["params"].items()
    }
    return TrainedSurrogate(
        spec=spec,
        bounds=bounds,
        active=tuple(spec_doc["active_inputs"]),
        support_x=np.asarray(doc["support_x"], dtype=float),
        support_y=np.asarray(doc["support_y"], dtype=float),
        params=params,
    )
