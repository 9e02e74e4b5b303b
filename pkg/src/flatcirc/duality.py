"""Duality without metrics: products twisted by virtual identities.

Includes the order-by-order circ-inverse, primitive sections of the tangent
bundle viewed as an external bundle, the twisted multiplication
X * Y = eps^{-1} o X o Y, and the verification report for the Euler-field
property of the old identity.  The two competing flatness hypotheses on the
twist field (flat eps versus flat eps^{-1}) are both computed and labeled;
neither is silently preferred.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .fmanifold import (FStructure, MissingIdentityError, five_term_residual,
                        shift_base)
from .geometry import (Connection, EndField, HiggsField, VectorField,
                       covariant_derivative, curvature, iter_tensor,
                       lie_bracket, pencil_curvature_split,
                       tensor_vanishes_through)
from .series import (Exponent, Scalar, TruncatedSeries, as_fraction,
                     primitive_of_closed_family, total_degree)


class NotInvertibleError(ValueError):
    """circ-multiplication by the field is singular at the origin."""


class NotFlatSectionError(ValueError):
    pass


class IntegrabilityError(ValueError):
    pass


def _mult_matrix(structure: FStructure, v: VectorField) -> List[List[TruncatedSeries]]:
    """Series matrix M^c_b of circ-multiplication by v: (v o w)^c = M^c_b w^b."""
    n = structure.dim
    t = structure.structure.tensor
    out = []
    for c in range(n):
        row = []
        for b in range(n):
            acc = TruncatedSeries.zero(n, structure.order)
            for a in range(n):
                acc = acc + v.components[a] * t[a][b][c]
            row.append(acc)
        out.append(row)
    return out


def solve_series_system(matrix: Sequence[Sequence[TruncatedSeries]],
                        rhs: VectorField) -> VectorField:
    """Solve M w = r order by order; M must be invertible at the origin."""
    n = len(matrix)
    cap = rhs.components[0].cap
    valid = min(min(s.valid_to for row in matrix for s in row), rhs.valid_to)
    m0 = [[matrix[c][b].constant_term for b in range(n)] for c in range(n)]
    m0_inv = linalg.invert(m0)
    if m0_inv is None:
        raise NotInvertibleError("system matrix singular at the origin")
    coeffs: List[Dict[Exponent, Fraction]] = [dict() for _ in range(n)]
    from .fmanifold import _exponents_of_degree
    for degree in range(valid + 1):
        for exponent in _exponents_of_degree(n, degree):
            residual = []
            for c in range(n):
                acc = rhs.components[c].coefficient(exponent)
                for b in range(n):
                    for e1, v1 in coeffs[b].items():
                        e2 = tuple(x - y for x, y in zip(exponent, e1))
                        if e1 == exponent or any(x < 0 for x in e2):
                            continue
                        acc -= v1 * matrix[c][b].coefficient(e2)
                residual.append(acc)
            solution = linalg.mat_vec(m0_inv, residual)
            for b in range(n):
                if solution[b] != 0:
                    coeffs[b][exponent] = solution[b]
    return VectorField(tuple(TruncatedSeries(n, cap, valid, dict(coeffs[b]))
                             for b in range(n)))


def circ_inverse(structure: FStructure, v: VectorField) -> VectorField:
    """The unique w with v o w = e, solved order by order."""
    if structure.identity is None:
        raise MissingIdentityError("circ-inverse needs an identity")
    return solve_series_system(_mult_matrix(structure, v), structure.identity)


@dataclass(frozen=True)
class PrimitiveSectionReport:
    b_field: EndField           # gauge B(0) = 0, with nabla_0 B = A
    image_map: VectorField      # the vector field B u
    jacobian_at_0: Tuple[Tuple[Fraction, ...], ...]
    primitive: bool
    closedness_residual: Tuple  # d omega^c components, indexed [c][a][b]


def primitive_section(structure: FStructure, base: Connection,
                      u: VectorField) -> PrimitiveSectionReport:
    """Potential endomorphism B and the candidate chart Bu for a flat section.

    B integrates the structure tensor (d_a B^c_b = C_{ab}^c, gauge B(0) = 0);
    u must be flat for the base connection.  Primitivity is the invertibility
    of the Jacobian of Bu at the origin, which coincides with invertibility of
    circ-multiplication by u there.
    """
    n = structure.dim
    if not u.is_constant():
        raise NotFlatSectionError("u must have constant components")
    t = structure.structure.tensor
    b_rows = []
    for c in range(n):
        row = []
        for b in range(n):
            family = [t[a][b][c] for a in range(n)]
            row.append(primitive_of_closed_family(family))
        b_rows.append(tuple(row))
    b_field = EndField(tuple(b_rows))
    image = b_field.apply(u)
    jacobian = tuple(tuple(image.components[c].derivative(a).constant_term
                           for a in range(n)) for c in range(n))
    primitive = linalg.determinant(jacobian) != 0
    closedness = tuple(tuple(tuple(
        b_field.matrix[c][b].derivative(a) - b_field.matrix[c][a].derivative(b)
        for b in range(n)) for a in range(n)) for c in range(n))
    return PrimitiveSectionReport(b_field, image, jacobian, primitive, closedness)


@dataclass(frozen=True)
class DualityPair:
    original: FStructure
    twist: VectorField
    inverse_used: VectorField
    dual: FStructure


def dual_structure(structure: FStructure, epsilon: VectorField) -> DualityPair:
    """The twisted multiplication X * Y = eps^{-1} o X o Y with identity eps."""
    n = structure.dim
    eps_inv = circ_inverse(structure, epsilon)
    tensor = HiggsField.build(n, lambda a, b, c: structure.multiply(
        eps_inv, structure.multiply(structure.basis(a),
                                    structure.basis(b))).components[c])
    dual = FStructure(tensor, identity=epsilon)
    return DualityPair(structure, epsilon, eps_inv, dual)


@dataclass(frozen=True)
class HypothesisItem:
    label: str
    holds: bool
    proven_to: int


@dataclass(frozen=True)
class DualityVerifyReport:
    """Residuals of the Euler-property of the old identity under the twist.

    ``bracket_defect_flat_eps`` is [eps, e] - eps (the shape expected when the
    twist field itself is flat for the shifted connection);
    ``bracket_defect_flat_inverse`` is [eps, e] + eps (the shape observed when
    instead its circ-inverse is flat).  The bracket convention is
    [X, Y]^c = X(Y^c) - Y(X^c) throughout.
    """

    hypotheses: Tuple[HypothesisItem, ...]
    bracket_defect_flat_eps: VectorField
    bracket_defect_flat_inverse: VectorField
    euler_weight_one: Tuple[Tuple[VectorField, ...], ...]
    kernel_stability: Tuple[VectorField, ...]
    bridging: Tuple[VectorField, ...]
    bracket_convention: str = "[X,Y]^c = X(Y^c) - Y(X^c)"


def duality_verify(structure: FStructure, base: Connection, conn: Connection,
                   epsilon: VectorField) -> DualityVerifyReport:
    """Verify the weight-one Euler property of e for the twisted structure.

    ``base`` is the connection for which the identity is flat; ``conn`` is the
    shifted pencil member whose difference from ``base`` is the structure
    tensor itself.  Hypothesis failures are reported item by item, never
    raised.
    """
    if structure.identity is None:
        raise MissingIdentityError("duality verification needs an identity")
    n = structure.dim
    e = structure.identity
    check = structure.valid_to

    hypotheses = []
    nabla0_e = tuple(covariant_derivative(base, structure.basis(a), e)
                     for a in range(n))
    hypotheses.append(HypothesisItem(
        "identity flat for base connection",
        all(v.vanishes_through(v.valid_to) for v in nabla0_e),
        min(v.valid_to for v in nabla0_e)))
    nabla_eps = tuple(covariant_derivative(conn, structure.basis(a), epsilon)
                      for a in range(n))
    flat_eps = all(v.vanishes_through(v.valid_to) for v in nabla_eps)
    hypotheses.append(HypothesisItem(
        "twist field flat for shifted connection", flat_eps,
        min(v.valid_to for v in nabla_eps)))
    try:
        eps_inv = circ_inverse(structure, epsilon)
        invertible = True
    except NotInvertibleError:
        eps_inv = None
        invertible = False
    hypotheses.append(HypothesisItem("twist field circ-invertible at origin",
                                     invertible, check))
    distinct = any(not (conn.christoffel[a][b][c] - base.christoffel[a][b][c])
                   .vanishes_through(check)
                   for a in range(n) for b in range(n) for c in range(n))
    hypotheses.append(HypothesisItem("shifted connection differs from base",
                                     distinct, check))
    if eps_inv is not None:
        nabla_inv = tuple(covariant_derivative(conn, structure.basis(a), eps_inv)
                          for a in range(n))
        hypotheses.append(HypothesisItem(
            "inverse of twist field flat for shifted connection",
            all(v.vanishes_through(v.valid_to) for v in nabla_inv),
            min(v.valid_to for v in nabla_inv)))

    bracket = lie_bracket(epsilon, e)
    defect_plus = bracket - epsilon
    defect_minus = bracket + epsilon

    if eps_inv is not None:
        pair = dual_structure(structure, epsilon)
        dual = pair.dual
        euler = tuple(tuple(
            lie_bracket(e, dual.multiply(dual.basis(a), dual.basis(b)))
            - dual.multiply(lie_bracket(e, dual.basis(a)), dual.basis(b))
            - dual.multiply(dual.basis(a), lie_bracket(e, dual.basis(b)))
            - dual.multiply(dual.basis(a), dual.basis(b))
            for b in range(n)) for a in range(n))
        # [e, eps o X] + eps o X for flat X: stability of the twisted kernel
        kernel = tuple(
            lie_bracket(e, structure.multiply(epsilon, structure.basis(a)))
            + structure.multiply(epsilon, structure.basis(a))
            for a in range(n))
        # flat eps for conn = base + A forces (base - A)-flatness of eps^{-1}
        minus = base.shifted(structure.structure, Fraction(-1))
        bridging = tuple(covariant_derivative(minus, structure.basis(a), eps_inv)
                         for a in range(n))
    else:
        zero = VectorField.zero(n, structure.order)
        euler = tuple(tuple(zero for _ in range(n)) for _ in range(n))
        kernel = tuple(zero for _ in range(n))
        bridging = tuple(zero for _ in range(n))

    return DualityVerifyReport(tuple(hypotheses), defect_plus, defect_minus,
                               euler, kernel, bridging)


def flat_section_solve(structure: FStructure, base: Connection, lambda0: Scalar,
                       v0: Sequence[Scalar]) -> VectorField:
    """Unique w with w(0) = v0 and (base + lambda0 A) w = 0, degree by degree.

    Each homogeneous layer is obtained by formally integrating the previous
    one; the closedness required by the integration is exactly the flatness of
    the pencil member, so a violation surfaces as an integrability error.
    """
    n = structure.dim
    cap = structure.order
    lam = as_fraction(lambda0)
    conn = shift_base(structure, base, lam)
    valid = min(structure.valid_to + 1, cap)
    w_coeffs: List[Dict[Exponent, Fraction]] = [
        {} if as_fraction(v) == 0 else {(0,) * n: as_fraction(v)}
        for v in v0]
    from .series import NotClosedError
    for degree in range(valid):
        w = VectorField(tuple(TruncatedSeries(n, cap, cap, dict(c))
                              for c in w_coeffs))
        # the degree-k layer of the defining equation integrates to layer k+1
        for c in range(n):
            family = []
            for a in range(n):
                acc = TruncatedSeries.zero(n, cap)
                for b in range(n):
                    acc = acc + w.components[b] * conn.christoffel[a][b][c]
                layer = {e: v for e, v in (-acc).coeffs.items()
                         if total_degree(e) == degree}
                family.append(TruncatedSeries(n, cap, cap, layer))
            try:
                g = primitive_of_closed_family(family)
            except NotClosedError as err:
                raise IntegrabilityError(
                    f"pencil member not flat: component {c}, pair {err.pair}, "
                    f"monomial {err.exponent}") from err
            for e, v in g.coeffs.items():
                s = w_coeffs[c].get(e, Fraction(0)) + v
                if s == 0:
                    w_coeffs[c].pop(e, None)
                else:
                    w_coeffs[c][e] = s
    return VectorField(tuple(TruncatedSeries(n, cap, valid, dict(c))
                             for c in w_coeffs))
