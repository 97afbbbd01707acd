"""Cellular sheaves on agent graphs and Laplacian-driven consensus.

Vertices carry vector stalks, each edge carries a stalk plus one restriction
matrix per endpoint. The coboundary stacks the per-edge disagreements
F_u x_u - F_v x_v; the Laplacian L = delta^T delta is symmetric PSD and its
kernel is exactly the space of globally consistent assignments. Diffusion
x <- x - alpha * L x drives any start vector to its projection onto that
kernel while the Dirichlet energy 0.5 x^T L x decays; with a positive delay
bound, vertex updates read seeded-stale neighbor blocks instead, modeling
unsynchronized rounds.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLarge, ShapeMismatch, UnstableStepSize

ZERO_EIGENVALUE_TOL = 1e-9
DENSE_DIM_GUARD = 2000


@dataclass(frozen=True)
class CellularSheaf:
    vertices: tuple[tuple[str, int], ...]
    edges: tuple[tuple[str, str, int], ...]
    restrictions: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        ids = [v for v, _ in self.vertices]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate vertex ids")
        if any(d < 1 for _, d in self.vertices):
            raise ValueError("vertex stalk dims must be positive")
        if len(self.edges) != len(self.restrictions):
            raise ShapeMismatch("one restriction pair required per edge")
        dims = dict(self.vertices)
        for (u, v, edim), (fu, fv) in zip(self.edges, self.restrictions):
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if u not in dims or v not in dims:
                raise ValueError(f"edge ({u}, {v}) references unknown vertex")
            if edim < 1:
                raise ValueError("edge stalk dims must be positive")
            if fu.shape != (edim, dims[u]):
                raise ShapeMismatch(
                    f"restriction for {u!r} on ({u},{v}) must be {edim}x{dims[u]}, got {fu.shape}"
                )
            if fv.shape != (edim, dims[v]):
                raise ShapeMismatch(
                    f"restriction for {v!r} on ({u},{v}) must be {edim}x{dims[v]}, got {fv.shape}"
                )

    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.vertices)

    def vertex_offsets(self) -> dict[str, tuple[int, int]]:
        offsets = {}
        pos = 0
        for v, d in self.vertices:
            offsets[v] = (pos, pos + d)
            pos += d
        return offsets

    def total_vertex_dim(self) -> int:
        return sum(d for _, d in self.vertices)

    def total_edge_dim(self) -> int:
        return sum(d for _, _, d in self.edges)

    @classmethod
    def constant(cls, vertex_ids, edges) -> "CellularSheaf":
        """Scalar stalks with identity restrictions; L reduces to the graph Laplacian."""
        one = np.eye(1)
        return cls(
            vertices=tuple((v, 1) for v in vertex_ids),
            edges=tuple((u, v, 1) for u, v in edges),
            restrictions=tuple((one, one) for _ in edges),
        )


@dataclass(frozen=True)
class Cochain0:
    """Per-vertex real vectors, ordered like the sheaf's vertex list."""

    blocks: tuple[np.ndarray, ...]

    def stack(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0)
        return np.concatenate([np.asarray(b, dtype=float).ravel() for b in self.blocks])

    @classmethod
    def from_vector(cls, s: CellularSheaf, x: np.ndarray) -> "Cochain0":
        blocks = []
        pos = 0
        for _, d in s.vertices:
            blocks.append(np.array(x[pos:pos + d], dtype=float))
            pos += d
        return cls(tuple(blocks))

    @classmethod
    def from_mapping(cls, s: CellularSheaf, data: dict) -> "Cochain0":
        blocks = []
        for v, d in s.vertices:
            if v not in data:
                raise ShapeMismatch(f"state vector missing vertex {v!r}")
            b = np.asarray(data[v], dtype=float).ravel()
            if b.shape != (d,):
                raise ShapeMismatch(f"block for {v!r} must have dim {d}, got {b.shape}")
            blocks.append(b)
        return cls(tuple(blocks))

    def to_mapping(self, s: CellularSheaf) -> dict[str, list[float]]:
        return {v: [float(x) for x in b] for (v, _), b in zip(s.vertices, self.blocks)}


@dataclass(frozen=True)
class DiffusionConfig:
    alpha: float
    max_iters: int = 10_000
    tol: float = 1e-8
    delay_bound: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.delay_bound < 0:
            raise ValueError("delay_bound must be >= 0")


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: tuple[float, ...] = ()
    zero_multiplicity: int = 0
    h0_dim: int = 0
    h1_dim: int = 0
    dirichlet_trace: tuple[float, ...] = ()
    converged: bool = True
    iterations: int = 0
    residual: float = 0.0


def coboundary(s: CellularSheaf) -> np.ndarray:
    n = s.total_vertex_dim()
    m = s.total_edge_dim()
    offsets = s.vertex_offsets()
    delta = np.zeros((m, n))
    row = 0
    for (u, v, edim), (fu, fv) in zip(s.edges, s.restrictions):
        ul, uh = offsets[u]
        vl, vh = offsets[v]
        delta[row:row + edim, ul:uh] = fu
        delta[row:row + edim, vl:vh] = -fv
        row += edim
    return delta


def laplacian(s: CellularSheaf) -> np.ndarray:
    d = coboundary(s)
    return d.T @ d


def dirichlet_energy(L: np.ndarray, x: np.ndarray) -> float:
    return float(0.5 * x @ (L @ x))


def power_iteration_lmax(L: np.ndarray, tol: float = 1e-8, max_iters: int = 10_000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix via power iteration."""
    n = L.shape[0]
    if n == 0 or not np.any(L):
        return 0.0
    x = np.random.default_rng(0).standard_normal(n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iters):
        y = L @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        new_lam = float(x @ (L @ x))
        if abs(new_lam - lam) < tol * max(1.0, abs(new_lam)):
            return new_lam
        lam = new_lam
    return lam


def _validate_alpha(L: np.ndarray, cfg: DiffusionConfig, allow_unstable: bool) -> None:
    lam_max = power_iteration_lmax(L)
    if lam_max > 0 and cfg.alpha >= 2.0 / lam_max:
        msg = (
            f"alpha={cfg.alpha} >= 2/lambda_max={2.0 / lam_max:.6g}; "
            "synchronous diffusion may diverge"
        )
        if not allow_unstable:
            raise UnstableStepSize(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def diffuse(
    s: CellularSheaf,
    x0: Cochain0,
    cfg: DiffusionConfig,
    allow_unstable: bool = False,
) -> tuple[Cochain0, SpectralReport]:
    """Run discrete heat-equation steps until the residual drops below tol.

    Synchronous when delay_bound is 0; otherwise each vertex reads neighbor
    blocks up to delay_bound iterations stale, with staleness drawn per vertex
    per iteration from a generator seeded by cfg.seed. Non-convergence is
    reported in the result, not raised.
    """
    L = laplacian(s)
    x = x0.stack()
    if x.shape != (L.shape[0],):
        raise ShapeMismatch(f"state has dim {x.shape[0]}, sheaf needs {L.shape[0]}")
    if cfg.delay_bound == 0:
        _validate_alpha(L, cfg, allow_unstable)
    rng = np.random.default_rng(cfg.seed)
    offsets = s.vertex_offsets()
    trace = [dirichlet_energy(L, x)]
    history = [x.copy()]  # oldest-first window of past iterates, delayed mode only
    iterations = 0
    residual = float(np.max(np.abs(L @ x))) if x.size else 0.0
    for k in range(cfg.max_iters):
        if residual < cfg.tol:
            break
        if cfg.delay_bound == 0:
            x = x - cfg.alpha * (L @ x)
        else:
            nxt = x.copy()
            for v, _ in s.vertices:
                lag = int(rng.integers(0, cfg.delay_bound + 1))
                stale = history[max(0, len(history) - 1 - lag)].copy()
                lo, hi = offsets[v]
                stale[lo:hi] = x[lo:hi]  # own block is always current
                nxt[lo:hi] = x[lo:hi] - cfg.alpha * (L[lo:hi, :] @ stale)
            x = nxt
            history.append(x.copy())
            if len(history) > cfg.delay_bound + 1:
                history.pop(0)
        iterations = k + 1
        residual = float(np.max(np.abs(L @ x))) if x.size else 0.0
        trace.append(dirichlet_energy(L, x))
    report = SpectralReport(
        dirichlet_trace=tuple(trace),
        converged=residual < cfg.tol,
        iterations=iterations,
        residual=residual,
    )
    return Cochain0.from_vector(s, x), report


def harmonic_basis(s: CellularSheaf, tol: float = ZERO_EIGENVALUE_TOL) -> list[Cochain0]:
    """Orthonormal basis of ker L: the globally consistent assignments."""
    L = laplacian(s)
    if L.shape[0] == 0:
        return []
    eigenvalues, vectors = np.linalg.eigh(L)
    return [
        Cochain0.from_vector(s, vectors[:, i])
        for i in range(len(eigenvalues))
        if eigenvalues[i] < tol
    ]


def cohomology_dims(s: CellularSheaf, tol: float = ZERO_EIGENVALUE_TOL) -> tuple[int, int]:
    """(dim ker delta, dim coker delta) for a graph with no 2-cells.

    ker delta equals ker L, so both dimensions come from the Laplacian
    spectrum: rank delta = total vertex dim - dim ker L.
    """
    L = laplacian(s)
    n = L.shape[0]
    if n == 0:
        return 0, s.total_edge_dim()
    eigenvalues = np.linalg.eigh(L)[0]
    h0 = int(np.count_nonzero(eigenvalues < tol))
    rank = n - h0
    h1 = s.total_edge_dim() - rank
    return h0, h1


def spectrum(s: CellularSheaf, tol: float = ZERO_EIGENVALUE_TOL) -> SpectralReport:
    n = s.total_vertex_dim()
    if n > DENSE_DIM_GUARD:
        raise DimensionTooLarge(f"total dim {n} exceeds dense-solver guard {DENSE_DIM_GUARD}")
    L = laplacian(s)
    eigenvalues = np.linalg.eigh(L)[0] if n else np.zeros(0)
    zero_mult = int(np.count_nonzero(eigenvalues < tol))
    h0, h1 = cohomology_dims(s, tol)
    return SpectralReport(
        eigenvalues=tuple(float(v) for v in eigenvalues),
        zero_multiplicity=zero_mult,
        h0_dim=h0,
        h1_dim=h1,
    )


def sheaf_to_json(s: CellularSheaf) -> dict:
    return {
        "vertices": [{"id": v, "dim": d} for v, d in s.vertices],
        "edges": [
            {
                "u": u,
                "v": v,
                "dim": edim,
                "restrictionU": fu.tolist(),
                "restrictionV": fv.tolist(),
            }
            for (u, v, edim), (fu, fv) in zip(s.edges, s.restrictions)
        ],
    }


def sheaf_from_json(data: dict) -> CellularSheaf:
    """Build a sheaf from its file form: vertex dims plus oriented edges whose
    restriction matrices are row-major nested lists."""
    vertices = tuple((str(v["id"]), int(v["dim"])) for v in data["vertices"])
    edges = []
    restrictions = []
    for e in data.get("edges", []):
        edges.append((str(e["u"]), str(e["v"]), int(e["dim"])))
        fu = np.asarray(e["restrictionU"], dtype=float)
        fv = np.asarray(e["restrictionV"], dtype=float)
        if fu.ndim == 1:
            fu = fu.reshape(int(e["dim"]), -1)
        if fv.ndim == 1:
            fv = fv.reshape(int(e["dim"]), -1)
        restrictions.append((fu, fv))
    return CellularSheaf(vertices, tuple(edges), tuple(restrictions))


def load_sheaf_file(path) -> tuple[CellularSheaf, Cochain0 | None, DiffusionConfig | None]:
    """Read a sheaf file; optional 'x0' and 'config' blocks ride along."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    sheaf = sheaf_from_json(data)
    x0 = Cochain0.from_mapping(sheaf, data["x0"]) if "x0" in data else None
    cfg = None
    if "config" in data:
        c = data["config"]
        cfg = DiffusionConfig(
            alpha=float(c["alpha"]),
            max_iters=int(c.get("maxIters", 10_000)),
            tol=float(c.get("tol", 1e-8)),
            delay_bound=int(c.get("delayBound", 0)),
            seed=int(c.get("seed", 0)),
        )
    return sheaf, x0, cfg
