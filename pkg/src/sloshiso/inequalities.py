"""Scale-invariant isoperimetric functionals and their sharp bounds.

Four quantities are evaluated per shape and compared with the constants
they can never exceed:

  conj   P^2 * mu1   <= 16 pi^2      (convex, two symmetry axes)
  iso    P * nu1     <= 4 pi         (same hypotheses; any depth)
  szego  |F| * mu1   <= pi * j'^2    (simply connected)
  isop   sqrt|F|*nu1 <= sqrt(pi)*j'  (simply connected; any depth)

where j' is the first positive zero of the derivative of the order-one
Bessel function.  All bound constants are computed, never hard-coded.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import IO, Optional

from . import geometry
from .fem import DEFAULT_SEED, ExtrapolationResult, assemble, extrapolate, neumann_eigs
from .geometry import Shape, ShapeSpec, build_shape, shape_id_for, triangulate
from .sloshing import DepthSpec, slosh_eig

FUNCTIONAL_NAMES = ("conj", "iso", "szego", "isop")

CSV_HEADER = (
    "shape_id", "P", "A", "mu1", "mu1_err", "nu1",
    "conj_value", "conj_bound", "conj_margin",
    "iso_value", "iso_bound", "iso_margin",
    "szego_value", "szego_bound", "szego_margin",
    "isop_value", "isop_bound", "isop_margin",
    "applicable_conj", "applicable_szego",
)


# ---------------------------------------------------------------------------
# Bessel constant

def _j0_series(x: float) -> float:
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 1
    while True:
        term *= -q / (k * k)
        total += term
        if abs(term) <= 1e-18 * abs(total):
            return total
        k += 1


def _j1_series(x: float) -> float:
    q = 0.25 * x * x
    term = 0.5 * x
    total = term
    k = 1
    while True:
        term *= -q / (k * (k + 1))
        total += term
        if abs(term) <= 1e-18 * abs(total):
            return total
        k += 1


def j1prime(x: float) -> float:
    """Derivative of the order-one Bessel function, J0(x) - J1(x)/x."""
    return _j0_series(x) - _j1_series(x) / x


@lru_cache(maxsize=1)
def j1prime_zero() -> float:
    """First positive zero of J1', by bisection on [1.5, 2.5]."""
    lo, hi = 1.5, 2.5
    flo = j1prime(lo)
    if not (flo > 0.0 > j1prime(hi)):
        raise RuntimeError("bracket does not straddle the root")
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if j1prime(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BesselConstant:
    """The constant j'_{1,1} entering the disk bounds."""

    j1p1: float


@lru_cache(maxsize=1)
def bessel_constant() -> BesselConstant:
    return BesselConstant(j1p1=j1prime_zero())


def bounds() -> dict:
    """Sharp constants of the four functionals, computed on demand."""
    j = j1prime_zero()
    return {
        "conj": 16.0 * math.pi ** 2,
        "iso": 4.0 * math.pi,
        "szego": math.pi * j * j,
        "isop": math.sqrt(math.pi) * j,
    }


# ---------------------------------------------------------------------------
# reports

@dataclass
class InequalityRecord:
    name: str
    value: float
    bound: float
    margin: float  # bound - value
    uncertainty: float
    applicable: bool
    applicability_reason: str


@dataclass
class InequalityReport:
    """Per-shape functional values with margins and applicability."""

    shape_id: str
    P: float
    A: float
    mu1: float
    mu1_err: float
    nu1: float  # at the evaluated depth
    nu1_inf: float
    records: dict = field(default_factory=dict)

    def record(self, name: str) -> InequalityRecord:
        return self.records[name]


def evaluate(shape: Shape, spectrum_estimate, depth: DepthSpec,
             shape_id: Optional[str] = None) -> InequalityReport:
    """Evaluate the four functionals for one shape.

    ``spectrum_estimate`` is an (mu1, error_gauge) pair, typically from
    Richardson extrapolation.  The depth-appropriate nu1 feeds the iso
    and isop functionals; their bounds hold at any depth, with equality
    possible only at infinite depth.  Margins carry an uncertainty band
    propagated from the mu1 error gauge.
    """
    mu1, mu1_err = float(spectrum_estimate[0]), float(spectrum_estimate[1])
    if not mu1 > 0.0:
        raise ValueError(f"mu1 must be positive, got {mu1}")
    symmetry = geometry.check_symmetry(shape)
    P = shape.perimeter_exact
    A = shape.area_exact
    nu1 = slosh_eig(mu1, depth)
    nu1_inf = math.sqrt(mu1)

    mu_hi = mu1 + mu1_err
    mu_lo = max(mu1 - mu1_err, 1e-300)
    nu_band = 0.5 * (slosh_eig(mu_hi, depth) - slosh_eig(mu_lo, depth))

    conj_ok = symmetry.is_convex and symmetry.has_two_axes
    conj_reason = ("convex with two symmetry axes" if conj_ok
                   else "conjectural regime: needs convexity and two symmetry axes")
    simply_reason = "simply connected by construction"

    b = bounds()
    entries = {
        "conj": (P * P * mu1, P * P * mu1_err, conj_ok, conj_reason),
        "iso": (P * nu1, P * nu_band, conj_ok, conj_reason),
        "szego": (A * mu1, A * mu1_err, True, simply_reason),
        "isop": (math.sqrt(A) * nu1, math.sqrt(A) * nu_band, True, simply_reason),
    }
    records = {
        name: InequalityRecord(name=name, value=value, bound=b[name],
                               margin=b[name] - value, uncertainty=unc,
                               applicable=ok, applicability_reason=reason)
        for name, (value, unc, ok, reason) in entries.items()
    }
    return InequalityReport(
        shape_id=shape_id or shape_id_for(shape.spec),
        P=P, A=A, mu1=mu1, mu1_err=mu1_err, nu1=nu1, nu1_inf=nu1_inf,
        records=records)


# ---------------------------------------------------------------------------
# eigenvalue pipeline (mesh ladder + extrapolation)

@dataclass
class Mu1Estimate:
    mu1: float
    error_gauge: float
    levels: list  # (level, mu1) pairs actually solved
    monotone: bool


def estimate_mu1(shape: Shape, mesh_level: int, seed: int = DEFAULT_SEED,
                 num_levels: int = 3) -> Mu1Estimate:
    """Smallest nonzero eigenvalue with Richardson extrapolation.

    Solves on the mesh ladder ending at ``mesh_level`` (``num_levels``
    consecutive levels, so ``mesh_level >= num_levels - 1`` is needed).
    """
    if num_levels < 3:
        raise ValueError("extrapolation needs at least 3 levels")
    if mesh_level < num_levels - 1:
        raise ValueError(
            f"mesh_level must be >= {num_levels - 1} for extrapolation")
    first = mesh_level - num_levels + 1
    mesh = triangulate(shape, first)
    pairs = []
    while True:
        stiffness, mass = assemble(mesh)
        spectrum = neumann_eigs(stiffness, mass, k=1, seed=seed)
        pairs.append((mesh.refinement_level, float(spectrum.values[0])))
        if mesh.refinement_level >= mesh_level:
            break
        mesh = geometry.refine(mesh)
    result: ExtrapolationResult = extrapolate(pairs)
    return Mu1Estimate(mu1=result.estimate, error_gauge=result.error_gauge,
                       levels=pairs, monotone=result.monotone)


# ---------------------------------------------------------------------------
# family sweeps

@dataclass
class SweepRow:
    param: float
    shape_id: str
    report: Optional[InequalityReport] = None
    error: Optional[str] = None


@dataclass
class SweepResult:
    rows: list
    argmax: dict  # functional name -> SweepRow attaining the max value


def default_workers() -> int:
    """Worker-pool width, capped by the SLOSH_ISO_THREADS variable."""
    env = os.environ.get("SLOSH_ISO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def sweep_family(family, depth: DepthSpec, mesh_levels: int,
                 seed: int = DEFAULT_SEED, workers: Optional[int] = None) -> SweepResult:
    """Evaluate every shape of a parametric family.

    ``family`` yields (param, ShapeSpec) pairs (bare specs are accepted,
    parameterized by position).  Shapes are computed on a bounded worker
    pool but aggregated in family order; per-shape failures are recorded
    in their row and the sweep continues.
    """
    items = []
    for i, entry in enumerate(family):
        if isinstance(entry, ShapeSpec):
            items.append((float(i), entry))
        else:
            param, spec = entry
            items.append((float(param), spec))
    if len(items) < 2:
        raise ValueError("family must yield at least 2 shapes")
    items.sort(key=lambda pair: pair[0])

    def compute(pair):
        param, spec = pair
        sid = shape_id_for(spec)
        try:
            shape = build_shape(spec)
            est = estimate_mu1(shape, mesh_levels, seed=seed)
            report = evaluate(shape, (est.mu1, est.error_gauge), depth, shape_id=sid)
            return SweepRow(param=param, shape_id=sid, report=report)
        except Exception as exc:  # per-shape failure: record, keep sweeping
            return SweepRow(param=param, shape_id=sid, error=f"{type(exc).__name__}: {exc}")

    n_workers = workers if workers is not None else default_workers()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(compute, items))
    else:
        rows = [compute(pair) for pair in items]

    argmax = {}
    for name in FUNCTIONAL_NAMES:
        best = None
        for row in rows:
            if row.report is None:
                continue
            if best is None or row.report.record(name).value > best.report.record(name).value:
                best = row
        if best is not None:
            argmax[name] = best
    return SweepResult(rows=rows, argmax=argmax)


# ---------------------------------------------------------------------------
# CSV round-trip

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def report_to_csv_row(report: InequalityReport) -> str:
    cells = [report.shape_id.replace(",", ";"),
             _fmt(report.P), _fmt(report.A),
             _fmt(report.mu1), _fmt(report.mu1_err), _fmt(report.nu1)]
    for name in FUNCTIONAL_NAMES:
        rec = report.record(name)
        cells += [_fmt(rec.value), _fmt(rec.bound), _fmt(rec.margin)]
    cells.append("true" if report.record("conj").applicable else "false")
    cells.append("true" if report.record("szego").applicable else "false")
    return ",".join(cells)


def reports_to_csv(reports, target) -> None:
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    fh: IO = open(target, "w", encoding="utf-8", newline="\n") if own else target
    try:
        fh.write(",".join(CSV_HEADER) + "\n")
        for report in reports:
            fh.write(report_to_csv_row(report) + "\n")
    finally:
        if own:
            fh.close()


def _depth_from_row(mu1: float, nu1: float) -> DepthSpec:
    # recover the evaluation depth from nu1 = sqrt(mu1) tanh(d sqrt(mu1))
    ratio = nu1 / math.sqrt(mu1)
    if ratio >= 1.0 - 1e-12:
        return DepthSpec.infinite()
    return DepthSpec.finite(math.atanh(ratio) / math.sqrt(mu1))


def report_from_csv_row(line: str) -> InequalityReport:
    cells = line.rstrip("\n").split(",")
    if len(cells) != len(CSV_HEADER):
        raise ValueError(f"expected {len(CSV_HEADER)} cells, got {len(cells)}")
    sid = cells[0]
    P, A, mu1, mu1_err, nu1 = (float(c) for c in cells[1:6])
    applicable_conj = cells[18] == "true"
    applicable_szego = cells[19] == "true"
    depth = _depth_from_row(mu1, nu1)
    mu_hi = mu1 + mu1_err
    mu_lo = max(mu1 - mu1_err, 1e-300)
    nu_band = 0.5 * (slosh_eig(mu_hi, depth) - slosh_eig(mu_lo, depth))
    uncertainty = {
        "conj": P * P * mu1_err, "iso": P * nu_band,
        "szego": A * mu1_err, "isop": math.sqrt(A) * nu_band,
    }
    conj_reason = ("convex with two symmetry axes" if applicable_conj
                   else "conjectural regime: needs convexity and two symmetry axes")
    records = {}
    for pos, name in enumerate(FUNCTIONAL_NAMES):
        value, bound, margin = (float(c) for c in cells[6 + 3 * pos:9 + 3 * pos])
        applicable = applicable_conj if name in ("conj", "iso") else applicable_szego
        reason = conj_reason if name in ("conj", "iso") else "simply connected by construction"
        records[name] = InequalityRecord(
            name=name, value=value, bound=bound, margin=margin,
            uncertainty=uncertainty[name], applicable=applicable,
            applicability_reason=reason)
    return InequalityReport(shape_id=sid, P=P, A=A, mu1=mu1, mu1_err=mu1_err,
                            nu1=nu1, nu1_inf=math.sqrt(mu1), records=records)


def reports_from_csv(source) -> list:
    own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
    fh: IO = open(source, "r", encoding="utf-8") if own else source
    try:
        header = fh.readline().rstrip("\n")
        if header != ",".join(CSV_HEADER):
            raise ValueError("unexpected CSV header")
        return [report_from_csv_row(line) for line in fh if line.strip()]
    finally:
        if own:
            fh.close()
