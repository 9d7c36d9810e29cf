"""PCA and FastICA denoising of graphlet degree matrices.

Both methods z-score the orbit columns, project onto a few components and map
back to the original orbit space, then undo the z-scoring so the reconstruction
lives on the scale of the raw counts. Columns with zero variance take no part in
the decomposition and come back as their constant value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class StandardizedGDM:
    values: np.ndarray  # (n, m); masked columns are zero
    mean: np.ndarray
    std: np.ndarray
    mask: np.ndarray  # True where the column is constant

    @property
    def active(self) -> np.ndarray:
        return self.values[:, ~self.mask]

    def restore(self, active_values: np.ndarray) -> np.ndarray:
        out = np.repeat(self.mean[None, :], self.values.shape[0], axis=0)
        keep = ~self.mask
        out[:, keep] = active_values * self.std[keep] + self.mean[keep]
        return out


@dataclass(frozen=True, eq=False)
class ReconstructedGDM:
    values: np.ndarray
    directed: bool
    max_size: int
    orbit_ids: np.ndarray
    provenance: dict = field(default_factory=dict)
    name: str = ""
    sources: np.ndarray | None = None  # (n, c) independent components, ICA only

    @property
    def node_count(self) -> int:
        return self.values.shape[0]

    @property
    def orbit_count(self) -> int:
        return self.values.shape[1]

    def column(self, orbit_id: int) -> np.ndarray:
        pos = np.flatnonzero(self.orbit_ids == orbit_id)
        if len(pos) == 0:
            raise DomainError(f"orbit {orbit_id} not present in reconstruction")
        return self.values[:, pos[0]]


def standardize(values) -> StandardizedGDM:
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 2:
        raise DomainError("expected a 2-D matrix")
    if not np.all(np.isfinite(x)):
        raise DomainError("matrix contains non-finite entries")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    mask = np.ptp(x, axis=0) == 0 if len(x) else np.ones(x.shape[1], dtype=bool)
    safe = np.where(mask, 1.0, std)
    z = np.where(mask, 0.0, (x - mean) / safe)
    return StandardizedGDM(z, mean, std, mask)


def pca_spectrum(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of ``z.T @ z`` sorted by descending eigenvalue."""
    evals, evecs = np.linalg.eigh(z.T @ z)
    order = np.argsort(evals)[::-1]
    return evals[order], evecs[:, order]


def components_for_ratio(evals: np.ndarray, r: float) -> int:
    """Smallest L whose leading eigenvalues explain at least a share ``r`` of the total."""
    lam = np.clip(evals, 0.0, None)
    total = lam.sum()
    if total <= 0:
        return 0
    ratio = np.cumsum(lam) / total
    # cumulative sums can land a few ulps under 1.0
    hit = np.flatnonzero(ratio >= r - 1e-12)
    return int(hit[0]) + 1 if len(hit) else len(lam)


def _source(gdm):
    values = gdm.values
    return (np.asarray(values), gdm.directed, gdm.max_size,
            np.asarray(getattr(gdm, "orbit_ids", np.arange(values.shape[1]))), getattr(gdm, "name", ""))


def pca_reconstruct(gdm, r: float | None = None, components: int | None = None) -> ReconstructedGDM:
    """Reconstruct from the leading principal components.

    Give either ``r`` (explained-variance share, 0 < r <= 1) or a fixed
    ``components`` count (1 <= L <= m).
    """
    values, directed, max_size, orbit_ids, name = _source(gdm)
    n, m = values.shape
    if n < 2:
        raise DomainError("PCA needs at least two rows")
    if (r is None) == (components is None):
        raise DomainError("give exactly one of r or components")
    if r is not None and not 0 < r <= 1:
        raise DomainError(f"variance share must lie in (0, 1], got {r}")
    if components is not None and not 1 <= components <= m:
        raise DomainError(f"component count must lie in [1, {m}], got {components}")

    st = standardize(values)
    z = st.active
    evals, evecs = pca_spectrum(z)
    if r is not None:
        L = components_for_ratio(evals, r)
    else:
        L = min(components, z.shape[1])
    w = evecs[:, :L]
    recon = st.restore(z @ w @ w.T)
    lam = np.clip(evals, 0.0, None)
    explained = float(lam[:L].sum() / lam.sum()) if lam.sum() > 0 else 1.0
    prov = {"method": "pca", "components": int(L), "variance_ratio": r, "explained": explained}
    return ReconstructedGDM(recon, directed, max_size, orbit_ids, prov, name)


# ----------------------------------------------------------------- FastICA

def symmetric_decorrelation(w: np.ndarray, tol: float = 1e-12, max_iter: int = 1000) -> np.ndarray:
    """Iteratively orthonormalise the rows of ``w``.

    Scale by the square root of the spectral norm of ``w w^T`` (all singular
    values drop to <= 1), then apply ``w <- 1.5 w - 0.5 w w^T w`` until
    ``w w^T`` is the identity.
    """
    w = w / np.sqrt(np.linalg.norm(w @ w.T, 2))
    eye = np.eye(w.shape[0])
    for _ in range(max_iter):
        if np.abs(w @ w.T - eye).max() < tol:
            break
        w = 1.5 * w - 0.5 * (w @ w.T) @ w
    return w


@dataclass(frozen=True, eq=False)
class FastICAResult:
    sources: np.ndarray  # (n, c)
    unmixing: np.ndarray  # (c, p): whitening followed by rotation
    mixing: np.ndarray  # (p, c): pseudo-inverse of unmixing
    rotation: np.ndarray  # (c, c) weight matrix on whitened data
    n_iter: int
    converged: bool


def fastica(z: np.ndarray, c: int, max_iter: int = 1000, tol: float = 1e-6, seed: int = 0) -> FastICAResult:
    """Symmetric FastICA with the log-cosh contrast on centred data ``z`` (n x p)."""
    n, p = z.shape
    if not 1 <= c <= p:
        raise DomainError(f"component count must lie in [1, {p}], got {c}")
    if n <= c:
        raise DomainError(f"need more rows than components ({n} <= {c})")
    z = z - z.mean(axis=0)
    cov = z.T @ z / n
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    rank = int(np.sum(evals > max(evals[0], 0.0) * 1e-10)) if evals[0] > 0 else 0
    if c > rank:
        raise DomainError(f"{c} components requested but the whitened data has rank {rank}")
    whiten = evecs[:, :c].T / np.sqrt(evals[:c])[:, None]  # (c, p)
    x = whiten @ z.T  # (c, n), identity covariance

    rng = np.random.default_rng(seed)
    w = symmetric_decorrelation(rng.standard_normal((c, c)))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gwx = np.tanh(w @ x)
        g_prime = 1.0 - gwx ** 2
        w_new = gwx @ x.T / n - g_prime.mean(axis=1)[:, None] * w
        w_new = symmetric_decorrelation(w_new)
        # rows may flip sign between iterations without changing the solution
        lim = np.abs(np.abs(np.einsum("ij,ij->i", w_new, w)) - 1.0).max()
        w = w_new
        if lim < tol:
            converged = True
            break
    unmixing = w @ whiten
    mixing = np.linalg.pinv(unmixing)
    return FastICAResult((unmixing @ z.T).T, unmixing, mixing, w, it, converged)


def ica_reconstruct(gdm, c: int, max_iter: int = 1000, tol: float = 1e-6, seed: int = 0) -> ReconstructedGDM:
    values, directed, max_size, orbit_ids, name = _source(gdm)
    n, m = values.shape
    if not 1 <= c <= m:
        raise DomainError(f"component count must lie in [1, {m}], got {c}")
    st = standardize(values)
    z = st.active
    if z.shape[1] == 0:
        raise DomainError(f"{c} components requested but the whitened data has rank 0")
    if c > z.shape[1]:
        raise DomainError(
            f"{c} components requested but the whitened data has rank at most {z.shape[1]}")
    res = fastica(z, c, max_iter=max_iter, tol=tol, seed=seed)
    recon_active = (res.mixing @ res.sources.T).T
    prov = {"method": "ica", "components": int(c), "iterations": int(res.n_iter),
            "converged": bool(res.converged), "seed": int(seed)}
    return ReconstructedGDM(st.restore(recon_active), directed, max_size, orbit_ids, prov, name,
                            sources=res.sources)


def truncate_reconstruction(recon, target_orbit_ids) -> ReconstructedGDM:
    """Keep only the columns of ``target_orbit_ids`` (fit on many orbits, compare on few)."""
    target = np.asarray(list(target_orbit_ids), dtype=np.int64)
    if len(target) == 0:
        raise DomainError("cannot truncate to an empty orbit set")
    have = {int(o): i for i, o in enumerate(recon.orbit_ids)}
    missing = [int(o) for o in target if int(o) not in have]
    if missing:
        raise DomainError(f"unknown orbit id {missing[0]}")
    cols = [have[int(o)] for o in target]
    prov = dict(getattr(recon, "provenance", {}) or {})
    prov["fit_orbits"] = int(len(recon.orbit_ids))
    prov["compare_orbits"] = int(len(target))
    return ReconstructedGDM(np.asarray(recon.values)[:, cols], recon.directed, recon.max_size, target,
                            prov, getattr(recon, "name", ""), getattr(recon, "sources", None))
