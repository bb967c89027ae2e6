"""Random-matrix diagnostics: eigenvector-component statistics and level spacings.

The component populations ``eta = |<k|phi_i>|^2`` of the eigenvectors of a
unitary are histogrammed and compared with the circular-ensemble densities
through a reduced chi-squared statistic. Values near one signal chaos.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .linalg import eig_unitary, project_basis
from .operators import symmetry_projectors

ENSEMBLES = ("COE", "CUE", "CSE")
MIN_DIMENSION = {"COE": 3, "CUE": 2, "CSE": 3}
DEGENERACY_MODES = ("none", "pair_degenerate", "symmetry_sectors")
MIN_BINS = 40
MAX_BINS = 400
PAIR_TOL = 1e-8
UNFOLD_WINDOW = 10

WIGNER_DYSON = {
    1: (np.pi / 2, np.pi / 4),
    2: (32 / np.pi**2, 4 / np.pi),
    4: (2**18 / (3**6 * np.pi**3), 64 / (9 * np.pi)),
}
BINNING_RULE = f"ceil(sqrt(M)) bins clipped to [{MIN_BINS}, {MAX_BINS}], equal width over [0, max eta]"


def _log_density(ensemble: str, d: float, eta: np.ndarray, renormalise_cse: bool = True) -> np.ndarray:
    if ensemble == "COE":
        return (gammaln(d / 2) - gammaln((d - 1) / 2) + (d - 3) / 2 * np.log1p(-eta)
                - 0.5 * np.log(np.pi * eta))
    if ensemble == "CUE":
        return np.log(d - 1) + (d - 2) * np.log1p(-eta)
    if ensemble == "CSE":
        # the closed form integrates to (D-1)(D-2)/(D(D+1)); renormalising gives D(D+1)
        pref = np.log(d) + np.log(d + 1) if renormalise_cse else np.log(d - 1) + np.log(d - 2)
        return pref + np.log(eta) + (d - 1) * np.log1p(-eta)
    raise ValueError(f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}")


def rmt_density(ensemble: str, d_fit: float, eta, renormalise_cse: bool = True):
    """Reduced density of one eigenvector-component population.

    * COE: ``Gamma(D/2) / Gamma((D-1)/2) (1 - eta)^((D-3)/2) / sqrt(pi eta)``
    * CUE: ``(D - 1) (1 - eta)^(D - 2)``
    * CSE: ``(D - 1)(D - 2) eta (1 - eta)^(D - 1)``, rescaled to unit area
      unless ``renormalise_cse`` is false.
    """
    ensemble = ensemble.upper()
    if ensemble in MIN_DIMENSION and d_fit < MIN_DIMENSION[ensemble]:
        raise ValueError(f"{ensemble} density needs D >= {MIN_DIMENSION[ensemble]}, got {d_fit}")
    x = np.asarray(eta, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise ValueError("eta must lie strictly inside (0, 1)")
    with np.errstate(under="ignore"):
        out = np.exp(_log_density(ensemble, float(d_fit), x, renormalise_cse))
    return float(out) if out.ndim == 0 else out


def wigner_dyson_density(beta: int, s):
    """Wigner surmise ``A s^beta exp(-B s^2)`` with unit mean spacing."""
    if beta not in WIGNER_DYSON:
        raise ValueError(f"beta must be 1, 2 or 4, got {beta}")
    a, b = WIGNER_DYSON[beta]
    s = np.asarray(s, dtype=float)
    return a * s**beta * np.exp(-b * s**2)


def poisson_density(s):
    return np.exp(-np.asarray(s, dtype=float))


# ---------------------------------------------------------------- components


@dataclass(frozen=True)
class ComponentSample:
    """Eigenvector-component populations plus the dimension bookkeeping."""

    eta: np.ndarray
    dim: int
    mode: str
    n_sectors: int = 1
    sector_dims: tuple[int, ...] = ()

    def d_fit(self, ensemble: str) -> float:
        """Default dimension to plug into an ensemble density.

        Sector-resolved samples use the mean sector dimension. Pair-summed
        samples halve the dimension for COE and CUE; the CSE density already
        describes a Kramers-pair sum and keeps the full dimension.
        """
        if self.mode == "symmetry_sectors":
            return self.dim / self.n_sectors
        if self.mode == "pair_degenerate" and ensemble.upper() != "CSE":
            return self.dim / 2
        return float(self.dim)


def _pair_levels(phases: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Greedily pair adjacent eigenphases closer than ``tol`` (on the circle)."""
    n = len(phases)
    gaps = np.diff(np.r_[phases, phases[0] + 2 * np.pi])
    start = (int(np.argmax(gaps)) + 1) % n  # open the circle at its widest gap
    order = [(start + k) % n for k in range(n)]
    unwrapped = np.unwrap(phases[order])
    pairs, unpaired = [], []
    k = 0
    while k < n:
        if k + 1 < n and unwrapped[k + 1] - unwrapped[k] < tol:
            pairs.append((order[k], order[k + 1]))
            k += 2
        else:
            unpaired.append(phases[order[k]])
            k += 1
    if unpaired:
        shown = ", ".join(f"{p:.12f}" for p in unpaired[:5])
        raise ValueError(f"{len(unpaired)} eigenphases have no degenerate partner within {tol:g}: {shown}")
    return pairs


def sector_bases(symmetry: np.ndarray, reference: np.ndarray, tol: float = 1e-8) -> list[tuple[complex, np.ndarray]]:
    """Reference basis adapted to the eigenspaces of ``symmetry``.

    Reference vectors are projected onto each eigenspace and orthonormalised
    in their original order, so basis vectors that already respect the
    symmetry are kept unchanged.
    """
    identity_ref = np.allclose(reference, np.eye(reference.shape[0]))
    out = []
    for label, proj in symmetry_projectors(symmetry, tol):
        basis = project_basis(proj, None if identity_ref else reference)
        out.append((label, basis))
    return out


def _restrict(u: np.ndarray, basis: np.ndarray) -> np.ndarray:
    block = basis.conj().T @ u @ basis
    leak = np.linalg.norm(u @ basis - basis @ block)
    if leak > 1e-8 * max(1.0, np.sqrt(basis.shape[1])):
        raise ValueError(f"unitary does not preserve the symmetry sector (leakage {leak:.2e})")
    return block


def eigenvector_components(u: np.ndarray, reference: np.ndarray | None = None, mode: str = "none",
                           tol: float = PAIR_TOL, symmetry: np.ndarray | None = None) -> ComponentSample:
    """Populations ``|<k|phi_i>|^2`` of the eigenvectors of ``u``.

    Parameters
    ----------
    reference
        Orthonormal reference basis as columns (identity if omitted).
    mode
        ``"none"``: all ``D^2`` populations. ``"pair_degenerate"``:
        eigenvectors paired by eigenphase within ``tol`` and their
        populations summed, giving ``D^2 / 2`` samples. ``"symmetry_sectors"``:
        ``u`` is diagonalised inside each eigenspace of ``symmetry`` and only
        in-sector populations are kept.
    """
    u = np.asarray(u)
    d = u.shape[0]
    ref = np.eye(d, dtype=complex) if reference is None else np.asarray(reference)
    if mode == "symmetry_sectors":
        if symmetry is None:
            raise ValueError("symmetry_sectors mode needs a symmetry operator")
        samples, dims = [], []
        for _, basis in sector_bases(symmetry, ref):
            _, z = eig_unitary(_restrict(u, basis))
            samples.append((np.abs(z) ** 2).ravel())
            dims.append(basis.shape[1])
        return ComponentSample(np.concatenate(samples), d, mode, len(dims), tuple(dims))
    phases, v = eig_unitary(u)
    pops = np.abs(ref.conj().T @ v) ** 2  # rows: reference states, columns: eigenvectors
    if mode == "none":
        return ComponentSample(pops.ravel(), d, mode)
    if mode == "pair_degenerate":
        if d % 2:
            raise ValueError(f"odd dimension {d} cannot be split into degenerate pairs")
        pairs = _pair_levels(phases, tol)
        summed = np.stack([pops[:, a] + pops[:, b] for a, b in pairs], axis=1)
        return ComponentSample(summed.ravel(), d, mode)
    raise ValueError(f"unknown degeneracy mode {mode!r}; expected one of {DEGENERACY_MODES}")


# ---------------------------------------------------------------- chi squared


def default_bin_count(m: int) -> int:
    return int(min(max(math.ceil(math.sqrt(m)), MIN_BINS), MAX_BINS))


def histogram_density(samples, n_bins: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Area-normalised histogram over ``[0, max(samples)]``.

    Returns ``(centers, densities, edges)``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("cannot histogram an empty sample")
    n_bins = default_bin_count(x.size) if n_bins is None else int(n_bins)
    hi = float(x.max())
    if hi <= 0:
        hi = 1.0
    counts, edges = np.histogram(x, bins=n_bins, range=(0.0, hi))
    width = edges[1] - edges[0]
    dens = counts / (x.size * width)
    return 0.5 * (edges[1:] + edges[:-1]), dens, edges


@dataclass
class StatReport:
    bin_centers: np.ndarray
    bin_densities: np.ndarray
    bin_width: float
    x2: dict[str, float]
    d_fit: dict[str, float]
    excluded: dict[str, int]
    best: str
    degeneracy_mode: str
    sample_count: int
    settings: dict = field(default_factory=dict)

    @property
    def x2_rmt(self) -> float:
        return self.x2[self.best]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["bin_centers"] = self.bin_centers.tolist()
        out["bin_densities"] = self.bin_densities.tolist()
        out["x2_rmt"] = self.x2_rmt
        return out


def chi_squared_rmt(samples, d_fit: float | Mapping[str, float], ensembles: Sequence[str] = ENSEMBLES,
                    n_bins: int | None = None, residual: str = "density", floor: float = 0.0,
                    degeneracy_mode: str = "none", renormalise_cse: bool = True) -> StatReport:
    """Reduced chi-squared distance between a histogram and ensemble densities.

    ``X^2_a = 1/(N_bin - 1) sum_i (n_i - P_a(x_i))^2 / P_a(x_i)`` with the
    density evaluated at bin centres. With ``residual="density"`` (default)
    ``n_i`` is the area-normalised bin height; ``residual="counts"`` compares
    raw counts with expected counts instead. Bins whose target density
    underflows to zero, or falls below ``floor`` times the peak target, are
    excluded and counted in the report.
    """
    x = np.asarray(samples, dtype=float).ravel()
    centers, dens, edges = histogram_density(x, n_bins)
    width = float(edges[1] - edges[0])
    if residual not in ("density", "counts"):
        raise ValueError(f"residual must be 'density' or 'counts', got {residual!r}")
    x2, fits, excluded = {}, {}, {}
    for ens in ensembles:
        ens = ens.upper()
        d = float(d_fit[ens] if isinstance(d_fit, Mapping) else d_fit)
        fits[ens] = d
        target = rmt_density(ens, d, np.clip(centers, 1e-300, 1 - 1e-16), renormalise_cse)
        target = np.atleast_1d(target)
        keep = target > np.finfo(float).tiny
        if floor > 0:
            keep &= target >= floor * target.max()
        excluded[ens] = int(np.sum(~keep))
        if keep.sum() < 2:
            raise ValueError(f"all but {keep.sum()} bins excluded for {ens}")
        if residual == "density":
            obs, exp = dens[keep], target[keep]
        else:
            obs, exp = dens[keep] * x.size * width, target[keep] * x.size * width
        with np.errstate(over="ignore"):
            x2[ens] = float(np.sum((obs - exp) ** 2 / exp) / (keep.sum() - 1))
    best = min(x2, key=x2.get)
    settings = {"binning": BINNING_RULE, "n_bins": len(centers), "residual": residual,
                "floor": floor, "cse_renormalised": renormalise_cse, "target": "density at bin centre"}
    return StatReport(centers, dens, width, x2, fits, excluded, best, degeneracy_mode, int(x.size), settings)


def analyse_unitary(u: np.ndarray, reference: np.ndarray | None = None, mode: str = "none",
                    symmetry: np.ndarray | None = None, ensembles: Sequence[str] = ENSEMBLES,
                    d_fit: float | Mapping[str, float] | None = None, fit_ensemble: str | None = None,
                    **kwargs) -> StatReport:
    """Eigenvector components of ``u`` scored against each ensemble.

    Without an explicit ``d_fit`` every ensemble gets its own default
    dimension, unless ``fit_ensemble`` names the hypothesis under test, in
    which case its dimension is shared by all ensembles.
    """
    sample = eigenvector_components(u, reference, mode, symmetry=symmetry)
    if d_fit is None:
        if fit_ensemble is None:
            d_fit = {e.upper(): sample.d_fit(e) for e in ensembles}
        else:
            d_fit = sample.d_fit(fit_ensemble)
    return chi_squared_rmt(sample.eta, d_fit, ensembles, degeneracy_mode=mode, **kwargs)


def analyse_model(model, tau: float, ensembles: Sequence[str] | None = None, **kwargs) -> StatReport:
    """Statistics of a model's step unitary with the model's own defaults."""
    ensembles = (model.ensemble,) if ensembles is None else ensembles
    kwargs.setdefault("fit_ensemble", model.ensemble)
    return analyse_unitary(model.step_unitary(tau), model.reference_basis, model.degeneracy_mode,
                           model.symmetry, ensembles, **kwargs)


# ---------------------------------------------------------------- level spacings


def sector_spectra(u: np.ndarray, symmetry: np.ndarray | None = None) -> list[np.ndarray]:
    """Eigenphases of ``u`` grouped by the eigenspaces of ``symmetry``."""
    if symmetry is None:
        return [eig_unitary(u).phases]
    d = u.shape[0]
    return [eig_unitary(_restrict(u, basis)).phases for _, basis in sector_bases(symmetry, np.eye(d))]


def unfold_local_mean(levels: np.ndarray, window: int = UNFOLD_WINDOW) -> np.ndarray:
    """Spacings of sorted ``levels`` divided by the mean of their ``2 window`` neighbours."""
    s = np.diff(np.sort(np.asarray(levels, dtype=float)))
    n = len(s)
    span = min(2 * window, n - 1)
    out = np.empty(n)
    for i in range(n):
        lo = min(max(0, i - window), n - span - 1)
        neighbours = np.r_[s[lo:i], s[i + 1:lo + span + 1]]
        out[i] = s[i] / neighbours.mean()
    return out


def level_spacings(spectra: Iterable[np.ndarray], unfold_window: int = UNFOLD_WINDOW) -> np.ndarray:
    """Unfolded nearest-neighbour spacings superimposed over subspaces.

    Subspaces with fewer than ``unfold_window + 2`` levels are skipped with a
    warning. The combined sample is rescaled to unit mean.
    """
    chunks = []
    for levels in spectra:
        levels = np.asarray(levels, dtype=float)
        if len(levels) < unfold_window + 2:
            warnings.warn(f"skipping a subspace with only {len(levels)} levels", stacklevel=2)
            continue
        chunks.append(unfold_local_mean(levels, unfold_window))
    if not chunks:
        raise ValueError("no subspace has enough levels to unfold")
    s = np.concatenate(chunks)
    return s / s.mean()
