"""Rational B-spline curves and closed oriented loops of them.

Basis evaluation follows the knot-span / Cox-de Boor recurrences of the NURBS
book (span search A2.1, non-vanishing basis A2.2).
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from cutquad.errors import ArgumentError

CLOSURE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class NurbsCurve:
    degree: int
    knots: Tuple[float, ...]
    control_points: Tuple[Tuple[float, ...], ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        degree = int(self.degree)
        knots = tuple(float(k) for k in self.knots)
        points = tuple(tuple(float(c) for c in p) for p in self.control_points)
        weights = tuple(float(w) for w in self.weights)

        if degree < 0:
            raise ArgumentError(f"NURBS degree must be non-negative, got {degree}")
        if not points:
            raise ArgumentError("A NURBS curve needs at least one control point")
        if len({len(p) for p in points}) != 1:
            raise ArgumentError("All control points must have the same dimension")
        if len(knots) != len(points) + degree + 1:
            raise ArgumentError(
                f"Knot count {len(knots)} != control points {len(points)} + degree {degree} + 1"
            )
        if len(weights) != len(points):
            raise ArgumentError(f"Weight count {len(weights)} != control point count {len(points)}")
        if not all(w > 0 for w in weights):
            raise ArgumentError("All NURBS weights must be positive")
        if any(b < a for a, b in zip(knots, knots[1:])):
            raise ArgumentError("Knot sequence must be non-decreasing")
        if len(set(knots[: degree + 1])) != 1 or len(set(knots[-(degree + 1):])) != 1:
            raise ArgumentError("Knot sequence must be clamped (end multiplicity = degree + 1)")

        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "control_points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return len(self.control_points[0])

    @property
    def domain(self) -> Tuple[float, float]:
        return self.knots[0], self.knots[-1]

    @property
    def start_point(self) -> np.ndarray:
        return np.asarray(self.control_points[0])

    @property
    def end_point(self) -> np.ndarray:
        return np.asarray(self.control_points[-1])

    def spans(self) -> List[Tuple[float, float]]:
        """Non-degenerate knot intervals in ascending order."""
        return [(a, b) for a, b in zip(self.knots, self.knots[1:]) if b > a]

    def translated(self, offset) -> "NurbsCurve":
        offset = np.asarray(offset, dtype=float)
        points = tuple(tuple(float(c) for c in np.asarray(p) + offset) for p in self.control_points)
        return NurbsCurve(self.degree, self.knots, points, self.weights)

    def reversed(self) -> "NurbsCurve":
        a, b = self.domain
        knots = tuple(a + b - k for k in reversed(self.knots))
        return NurbsCurve(self.degree, knots, tuple(reversed(self.control_points)), tuple(reversed(self.weights)))

    def find_span(self, t: float) -> int:
        n = len(self.control_points) - 1
        p = self.degree
        U = self.knots
        if t >= U[n + 1]:
            # last non-degenerate span
            span = n
            while span > p and U[span] == U[span + 1]:
                span -= 1
            return span
        low, high = p, n + 1
        mid = (low + high) // 2
        while t < U[mid] or t >= U[mid + 1]:
            if t < U[mid]:
                high = mid
            else:
                low = mid
            mid = (low + high) // 2
        return mid

    def basis_functions(self, span: int, t: float, degree: int = None) -> np.ndarray:
        """Non-vanishing basis functions N[span-degree .. span] at t."""
        p = self.degree if degree is None else degree
        U = self.knots
        N = np.zeros(p + 1)
        N[0] = 1.0
        left = np.zeros(p + 1)
        right = np.zeros(p + 1)
        for j in range(1, p + 1):
            left[j] = t - U[span + 1 - j]
            right[j] = U[span + j] - t
            saved = 0.0
            for r in range(j):
                temp = N[r] / (right[r + 1] + left[j - r])
                N[r] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            N[j] = saved
        return N

    def basis_derivatives(self, span: int, t: float) -> np.ndarray:
        """First derivatives of N[span-p .. span] at t."""
        p = self.degree
        dN = np.zeros(p + 1)
        if p == 0:
            return dN
        U = self.knots
        lower = self.basis_functions(span, t, p - 1)  # N[span-p+1 .. span, p-1]
        for k in range(p + 1):
            i = span - p + k
            term = 0.0
            if k >= 1:
                denom = U[i + p] - U[i]
                if denom > 0:
                    term += lower[k - 1] / denom
            if k <= p - 1:
                denom = U[i + p + 1] - U[i + 1]
                if denom > 0:
                    term -= lower[k] / denom
            dN[k] = p * term
        return dN

    def _check_parameter(self, t: float, derivative: bool = False):
        """Rejects t outside the knots and t on an interior knot where the curve breaks.

        An interior knot repeated degree + 1 times closes a zero-length span and
        splits the curve; repeated degree times it leaves a kink with no
        derivative.
        """
        a, b = self.domain
        if not b > a:
            raise ArgumentError(f"Curve has a zero-length parameter range [{a}, {b}]")
        if t < a or t > b:
            raise ArgumentError(f"Parameter {t} outside the knot range [{a}, {b}]")
        if a < t < b:
            multiplicity = self.knots.count(t)
            limit = self.degree if derivative else self.degree + 1
            if multiplicity and multiplicity >= limit:
                what = "derivative" if derivative else "point"
                raise ArgumentError(
                    f"Parameter {t} sits on a knot of multiplicity {multiplicity}; the curve has no single {what} there"
                )

    def _homogeneous(self, span):
        p = self.degree
        points = np.asarray(self.control_points[span - p: span + 1], dtype=float)
        weights = np.asarray(self.weights[span - p: span + 1], dtype=float)
        return points, weights


def nurbs_eval(curve: NurbsCurve, t: float) -> np.ndarray:
    """x(t) = sum N_i w_i P_i / sum N_i w_i."""
    t = float(t)
    curve._check_parameter(t)
    span = curve.find_span(t)
    points, weights = curve._homogeneous(span)
    N = curve.basis_functions(span, t) * weights
    return (N @ points) / N.sum()


def nurbs_derivative(curve: NurbsCurve, t: float) -> np.ndarray:
    """dx/dt by the quotient rule on the homogeneous form."""
    t = float(t)
    curve._check_parameter(t, derivative=True)
    span = curve.find_span(t)
    points, weights = curve._homogeneous(span)
    Nw = curve.basis_functions(span, t) * weights
    dNw = curve.basis_derivatives(span, t) * weights
    W = Nw.sum()
    dW = dNw.sum()
    C = (Nw @ points) / W
    return ((dNw @ points) - dW * C) / W


@dataclass(frozen=True)
class NurbsLoop:
    curves: Tuple[NurbsCurve, ...]

    def __post_init__(self):
        curves = tuple(self.curves)
        if not curves:
            raise ArgumentError("A loop needs at least one curve")
        if any(c.dim != 2 for c in curves):
            raise ArgumentError("Loops are planar: all control points must be 2D")
        for i, curve in enumerate(curves):
            following = curves[(i + 1) % len(curves)]
            gap = np.linalg.norm(curve.end_point - following.start_point)
            if gap > CLOSURE_TOLERANCE:
                raise ArgumentError(f"Loop is open between curve {i} and curve {(i + 1) % len(curves)} (gap {gap:.3e})")
        object.__setattr__(self, "curves", curves)

    def translated(self, offset) -> "NurbsLoop":
        return NurbsLoop(tuple(c.translated(offset) for c in self.curves))

    def reversed(self) -> "NurbsLoop":
        return NurbsLoop(tuple(c.reversed() for c in reversed(self.curves)))

    def is_counter_clockwise(self) -> bool:
        return loop_signed_area(self) > 0


def sample_loop(loop: NurbsLoop, n: int) -> np.ndarray:
    """n points spread over the curves, uniform in each curve's parameter."""
    if n < 1:
        raise ArgumentError("Sample count must be positive")
    count = len(loop.curves)
    per_curve = [n // count + (1 if i < n % count else 0) for i in range(count)]
    samples = []
    for curve, m in zip(loop.curves, per_curve):
        a, b = curve.domain
        for t in np.linspace(a, b, m, endpoint=False):
            samples.append(nurbs_eval(curve, t))
    return np.array(samples).reshape(-1, 2)


def loop_signed_area(loop: NurbsLoop, n: int = 1024) -> float:
    """Shoelace area of a dense polyline through the loop; positive when counter-clockwise."""
    return polyline_signed_area(sample_loop(loop, n))


def polyline_signed_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def circle_loop(center: Sequence[float], radii: Sequence[float]) -> NurbsLoop:
    """Four rational quadratic arcs, counter-clockwise, starting at angle 0.

    Corner weights 1, mid-arc weights sqrt(2)/2; with unequal radii the loop is
    the affine image of the circle, i.e. an exact ellipse.
    """
    cx, cy = (float(c) for c in center)
    rx, ry = (float(r) for r in radii)
    w = np.sqrt(2.0) / 2.0
    # 9 control points, the last repeating the first
    unit = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0)]
    net = [(cx + rx * ux, cy + ry * uy) for ux, uy in unit]
    curves = []
    for k in range(4):
        points = tuple(net[2 * k: 2 * k + 3])
        curves.append(NurbsCurve(2, (0.0, 0.0, 0.0, 1.0, 1.0, 1.0), points, (1.0, w, 1.0)))
    return NurbsLoop(tuple(curves))
