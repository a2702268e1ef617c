"""Weight catalogue for the degenerate eigenproblem and its admissibility checker.

A weight g is carried as an explicit three-way split

    g(x) = g_integrable(x) + g_decaying(x) - g_negative(x),

where the two positive parts play different roles: g_integrable is expected to
have finite L^{N/(2-alpha)} norm on all of R^N, while g_decaying is only
required to vanish against the kernel |x - y|^(2-alpha) locally at every probe
point and at infinity. g_negative is the magnitude of the negative part. All
catalogue weights are radial; evaluators take radii (scalars or arrays).

verify_weight_split samples these hypotheses numerically: limits cannot be
certified by sampling, so the decay verdicts demand a strictly decreasing
decade-sampled tail, and the norm verdicts compare per-decade increments of
the quadrature estimate.
"""

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import radial_integral


class WeightDomainError(ValueError):
    """Raised when a weight is evaluated outside its tabulated range."""


def _as_radii(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radii must be nonnegative")
    return r


def power_weight(x, alpha):
    """The degenerate coefficient |x|^alpha, with value 0 at the origin.

    x may be a point in R^N (1-d array) or a batch of points (2-d array,
    one point per row).
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (0, 2)")
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1) if x.ndim >= 1 else np.abs(x)
    return r**alpha


def borderline_log_radial(r, N, alpha):
    """Radial form of the borderline weight r^(alpha-2) * log(2 + r^(2-alpha))^((alpha-2)/N).

    Defined to be exactly 1 at r = 0. The power prefactor makes the function
    critically singular at the origin and critically decaying at infinity:
    it misses L^{N/(2-alpha)}(R^N) at both ends, yet r^(2-alpha) times the
    weight still goes to 0 as r -> infinity.
    """
    r = _as_radii(r)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    out = np.ones_like(r)
    nz = r > 0.0
    rn = r[nz]
    out[nz] = rn ** (alpha - 2.0) * np.log(2.0 + rn ** (2.0 - alpha)) ** ((alpha - 2.0) / N)
    return float(out[0]) if scalar else out


def borderline_log_value(x, N, alpha):
    """Point evaluation of the borderline weight; x is a point in R^N."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    return borderline_log_radial(r, N, alpha)


def _zero(r):
    return np.zeros_like(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class WeightSpec:
    """A radial weight with its explicit admissibility split.

    The three evaluators are pointwise nonnegative and vectorized over radii.
    verified_split is False for data-driven weights whose split cannot be
    checked beyond the sampled range.
    """

    name: str
    g_integrable: Callable = _zero
    g_decaying: Callable = _zero
    g_negative: Callable = _zero
    params: dict = field(default_factory=dict)
    verified_split: bool = True
    r_min: float = 0.0     # evaluable range; nontrivial only for tabulated data
    r_max: float = np.inf
    jumps: tuple = ()      # discontinuity radii (adaptive integrators split there)


def weight_split(spec, r):
    """Evaluate the (integrable, decaying, negative) parts at radii r."""
    r = _as_radii(r)
    if np.any(np.atleast_1d(r) > spec.r_max):
        raise WeightDomainError(
            f"weight '{spec.name}' sampled beyond its range r <= {spec.r_max:g}"
        )
    return spec.g_integrable(r), spec.g_decaying(r), spec.g_negative(r)


def weight_value(spec, r):
    """g(r), computed from the split so both paths share one evaluation."""
    gi, gd, gm = weight_split(spec, r)
    return gi + gd - gm


def weight_positive_part(spec, r):
    """g^+(r) = g_integrable + g_decaying."""
    gi, gd, _ = weight_split(spec, r)
    return gi + gd


def gaussian_bump(amplitude=1.0, width=1.0):
    """Positive Gaussian weight; rapid decay puts it wholly in the integrable part."""
    if amplitude <= 0 or width <= 0:
        raise ValueError("gaussian_bump needs positive amplitude and width")

    def g1(r):
        r = _as_radii(r)
        return amplitude * np.exp(-((r / width) ** 2))

    return WeightSpec(
        name="gaussian",
        g_integrable=g1,
        params={"amplitude": amplitude, "width": width},
    )


def compact_bump(radius=1.0, amplitude=1.0):
    """Smooth compactly supported positive weight (mollifier profile)."""
    if amplitude <= 0 or radius <= 0:
        raise ValueError("compact_bump needs positive amplitude and radius")

    def g1(r):
        r = _as_radii(r)
        s2 = np.atleast_1d((r / radius) ** 2)
        out = np.zeros_like(s2)
        inside = s2 < 1.0
        out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        return out[0] if np.ndim(r) == 0 else out

    return WeightSpec(
        name="compact-bump",
        g_integrable=g1,
        params={"radius": radius, "amplitude": amplitude},
    )


def sign_changing_ring(inner=1.0, outer=2.0, pos_amplitude=1.0, neg_amplitude=-0.5):
    """Indicator ring weight: +pos on [inner, outer), negative on the adjacent shell.

    The negative shell [outer, 2*outer - inner) has the same width as the
    positive ring. Both parts are bounded with compact support, so the
    positive ring is carried in the decaying slot and the negative part is
    plainly locally integrable.
    """
    if not 0 < inner < outer:
        raise ValueError("ring needs 0 < inner < outer")
    if pos_amplitude <= 0:
        raise ValueError("ring needs a positive amplitude for the positive band")
    neg = abs(neg_amplitude)
    shell_out = outer + (outer - inner)

    def g2(r):
        r = _as_radii(r)
        return pos_amplitude * ((r >= inner) & (r < outer)).astype(float)

    def gm(r):
        r = _as_radii(r)
        return neg * ((r >= outer) & (r < shell_out)).astype(float)

    return WeightSpec(
        name="ring",
        g_decaying=g2,
        g_negative=gm,
        params={
            "inner": inner,
            "outer": outer,
            "pos_amplitude": pos_amplitude,
            "neg_amplitude": -neg,
        },
        jumps=(inner, outer, shell_out),
    )


def indicator_ball(radius=1.0):
    """Indicator of the ball of given radius, assigned wholly to the integrable part."""
    if radius <= 0:
        raise ValueError("indicator_ball needs a positive radius")

    def g1(r):
        r = _as_radii(r)
        return (r < radius).astype(float)

    return WeightSpec(name="ball", g_integrable=g1, params={"radius": radius},
                      jumps=(radius,))


def borderline_log(N, alpha):
    """The borderline weight as an eigenproblem weight: decaying slot only."""
    if N < 3 or not 0.0 < alpha < 2.0:
        raise ValueError("borderline_log needs N >= 3 and alpha in (0, 2)")

    def g2(r):
        return borderline_log_radial(r, N, alpha)

    return WeightSpec(
        name="borderline-log",
        g_decaying=g2,
        params={"N": N, "alpha": alpha},
    )


def tabulated(radii, values, rule="linear"):
    """Weight interpolated from (radius, value) samples.

    The sign split is taken pointwise from the interpolated value and is
    flagged unverified: nothing is known beyond the sampled range, and
    evaluation there raises WeightDomainError.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if radii.ndim != 1 or radii.shape != values.shape or radii.size < 2:
        raise ValueError("tabulated needs matching 1-d radius/value arrays, >= 2 samples")
    if np.any(np.diff(radii) <= 0):
        raise ValueError("tabulated radii must be strictly increasing")
    if rule != "linear":
        raise ValueError(f"unsupported interpolation rule '{rule}'")
    r_lo, r_hi = radii[0], radii[-1]

    def interp(r):
        r = _as_radii(r)
        if np.any(np.atleast_1d(r) < r_lo - 1e-15) or np.any(np.atleast_1d(r) > r_hi):
            raise WeightDomainError(
                f"tabulated weight sampled outside [{r_lo:g}, {r_hi:g}]"
            )
        return np.interp(r, radii, values)

    def g1(r):
        return np.maximum(interp(r), 0.0)

    def gm(r):
        return np.maximum(-interp(r), 0.0)

    return WeightSpec(
        name="tabulated",
        g_integrable=g1,
        g_negative=gm,
        params={"n_samples": int(radii.size), "r_lo": float(r_lo), "r_hi": float(r_hi),
                "radii": radii, "values": values},
        verified_split=False,
        r_min=float(r_lo),
        r_max=float(r_hi),
    )


def tabulated_from_csv(path, rule="linear"):
    """Load a tabulated weight from a two-column CSV with header 'r,g'."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["r", "g"]:
            raise ValueError(f"{path}: expected CSV header 'r,g'")
        rows = [(float(row[0]), float(row[1])) for row in reader if row]
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two samples")
    radii, values = zip(*rows)
    return tabulated(np.array(radii), np.array(values), rule=rule)


# Builtin catalogue with default parameters, keyed by the names used in
# configuration documents. borderline-log needs (N, alpha) at build time.
CATALOGUE = {
    "gaussian": lambda N, alpha: gaussian_bump(),
    "compact-bump": lambda N, alpha: compact_bump(),
    "ring": lambda N, alpha: sign_changing_ring(),
    "ball": lambda N, alpha: indicator_ball(),
    "borderline-log": lambda N, alpha: borderline_log(N, alpha),
}


@dataclass
class DecayProbe:
    """Sampled decay sequence r -> sup_{|x-y|=r} |x-y|^(2-alpha) g_dec(x) at one center."""

    center: float
    radii: np.ndarray
    values: np.ndarray
    passed: bool


@dataclass
class WeightSplitReport:
    """Outcome of the sampled admissibility check for one weight."""

    weight: str
    N: int
    alpha: float
    norm_exponent: float
    g1_norm_estimate: float
    g1_norm_verdict: str  # 'finite' | 'divergent' | 'unverifiable'
    g2_norm_estimate: float
    g2_norm_verdict: str
    gplus_norm_estimate: float
    gplus_norm_verdict: str
    probes: list
    infinity: DecayProbe
    decay_pass: bool
    positive_part_nonzero: bool
    overall: str  # 'pass' | 'fail' | 'unverified'
    notes: list = field(default_factory=list)

    def to_dict(self):
        def probe_dict(p):
            return {
                "center": p.center,
                "radii": list(map(float, p.radii)),
                "values": list(map(float, p.values)),
                "passed": bool(p.passed),
            }

        return {
            "weight": self.weight,
            "N": self.N,
            "alpha": self.alpha,
            "norm_exponent": self.norm_exponent,
            "g1_norm_estimate": self.g1_norm_estimate,
            "g1_norm_verdict": self.g1_norm_verdict,
            "g2_norm_estimate": self.g2_norm_estimate,
            "g2_norm_verdict": self.g2_norm_verdict,
            "gplus_norm_estimate": self.gplus_norm_estimate,
            "gplus_norm_verdict": self.gplus_norm_verdict,
            "probes": [probe_dict(p) for p in self.probes],
            "infinity": probe_dict(self.infinity),
            "decay_pass": bool(self.decay_pass),
            "positive_part_nonzero": bool(self.positive_part_nonzero),
            "overall": self.overall,
            "notes": list(self.notes),
        }


def _norm_estimate(f, s, N, r_lo, r_hi):
    """Per-decade L^s-norm^s increments of f on [r_lo, r_hi] and a verdict.

    Divergence cannot be certified numerically; the verdict is 'divergent'
    when either the innermost or the outermost decade still contributes a
    non-negligible share of the cumulative integral.
    """
    decades = np.geomspace(r_lo, r_hi, int(round(np.log10(r_hi / r_lo))) + 1)
    increments = []
    for a, b in zip(decades[:-1], decades[1:]):
        val = radial_integral(lambda r: f(r) ** s * r ** (N - 1), a, b)
        increments.append(max(val, 0.0))
    total = float(np.sum(increments))
    if total == 0.0:
        return 0.0, "finite"
    head, tail = increments[0], increments[-1]
    verdict = "divergent" if (tail > 1e-6 * total or head > 1e-6 * total) else "finite"
    return total ** (1.0 / s), verdict


def _decreasing_to_zero(values, rel=1e-9):
    """True when the sequence decreases strictly (zero plateaus allowed)."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return False
    tiny = 1e-300
    for a, b in zip(values[:-1], values[1:]):
        if b <= tiny and a <= tiny:
            continue
        if not b < a * (1.0 - rel):
            return False
    return True


def _decay_probe(spec, alpha, center, radii, sphere_samples=257):
    """Decay sequence of the decaying part at one probe center |y| = center.

    For radial g the supremum over the sphere |x - y| = r is the supremum of
    g_dec over radii in [|center - r|, center + r], scanned on a dense grid.
    Only radii below the center (spheres not reaching the origin) enter the
    verdict; the limit under test is r -> 0.
    """
    r_small = radii[radii < 0.9 * center] if center > 0 else radii
    if r_small.size < 4:
        r_small = center * np.geomspace(1e-7, 0.5, 8) if center > 0 else radii
    vals = []
    for r in r_small:
        lo, hi = abs(center - r), center + r
        lo = max(lo, 1e-300)
        sample_r = np.geomspace(lo, hi, sphere_samples) if lo < hi else np.array([hi])
        sup = float(np.max(spec.g_decaying(sample_r)))
        vals.append(r ** (2.0 - alpha) * sup)
    vals = np.asarray(vals)
    order = np.argsort(r_small)[::-1]  # decreasing radii: sequence should decay
    passed = _decreasing_to_zero(vals[order])
    return DecayProbe(center=float(center), radii=r_small[order], values=vals[order], passed=passed)


def _infinity_probe(spec, alpha, radii):
    """Decay sequence r^(2-alpha) * g_dec(r) along increasing radii."""
    vals = radii ** (2.0 - alpha) * np.asarray(spec.g_decaying(radii), dtype=float)
    passed = _decreasing_to_zero(vals)
    return DecayProbe(center=np.inf, radii=radii, values=vals, passed=passed)


def verify_weight_split(spec, N, alpha, radii=None, centers=None):
    """Sampled check of the weight-split hypotheses.

    radii: strictly increasing sampling radii spanning at least 4 decades
    (default 1e-6 .. 1e6). centers: probe-center radii |y| for the local
    decay checks (default three generic nonzero points; the at-infinity
    check always runs).
    """
    if radii is None:
        radii = np.geomspace(1e-6, 1e6, 25)
    radii = np.asarray(radii, dtype=float)
    if radii.size < 5 or np.any(np.diff(radii) <= 0):
        raise ValueError("sampling radii must be strictly increasing")
    if np.log10(radii[-1] / radii[0]) < 4.0:
        raise ValueError("sampling radii must span at least 4 decades")
    if centers is None:
        centers = (0.5, 1.0, 2.0)

    notes = []
    r_hi = min(radii[-1], spec.r_max)
    r_lo = max(radii[0], spec.r_min if spec.r_min > 0 else radii[0])
    unverifiable = not spec.verified_split
    if np.isfinite(spec.r_max) and spec.r_max < radii[-1]:
        notes.append(f"sampling truncated to the tabulated range r <= {spec.r_max:g}")

    s = N / (2.0 - alpha)
    g1n, g1v = _norm_estimate(spec.g_integrable, s, N, r_lo, r_hi)
    g2n, g2v = _norm_estimate(spec.g_decaying, s, N, r_lo, r_hi)
    gpn, gpv = _norm_estimate(
        lambda r: spec.g_integrable(r) + spec.g_decaying(r), s, N, r_lo, r_hi
    )
    if unverifiable:
        g1v = g2v = gpv = "unverifiable"
        notes.append("split unverifiable beyond sample range")

    probe_radii = radii[radii <= r_hi]
    probes = [_decay_probe(spec, alpha, c, probe_radii) for c in centers]
    infinity = _infinity_probe(spec, alpha, probe_radii[probe_radii >= 1.0]
                               if np.any(probe_radii >= 1.0) else probe_radii)
    decay_pass = all(p.passed for p in probes) and infinity.passed

    sample = np.geomspace(max(r_lo, 1e-8), r_hi, 512)
    gplus = spec.g_integrable(sample) + spec.g_decaying(sample)
    positive_nonzero = bool(np.any(gplus > 0.0))

    if unverifiable:
        overall = "unverified"
    elif positive_nonzero and decay_pass and g1v == "finite":
        overall = "pass"
    else:
        overall = "fail"

    return WeightSplitReport(
        weight=spec.name,
        N=N,
        alpha=alpha,
        norm_exponent=s,
        g1_norm_estimate=g1n,
        g1_norm_verdict=g1v,
        g2_norm_estimate=g2n,
        g2_norm_verdict=g2v,
        gplus_norm_estimate=gpn,
        gplus_norm_verdict=gpv,
        probes=probes,
        infinity=infinity,
        decay_pass=decay_pass,
        positive_part_nonzero=positive_nonzero,
        overall=overall,
        notes=notes,
    )
