"""Relabeling symmetry of mechanisms on strict type profiles.

A mechanism is symmetric when relabeling the objects relabels the
allocation and leaves the payment alone: q_i(relabeled v) equals
q_{sigma(i)}(v) and t is relabeling-invariant.  For symmetric mechanisms,
global truthfulness decomposes into an order condition (higher-valued
objects get weakly more) plus truthfulness within each ordering cell;
`certify_theorem1` checks both directions of that equivalence on a
concrete mechanism.

Three constructions move mechanisms between domains:

* `symmetric_extension` spreads a sorted-domain mechanism over all strict
  profiles by relabeling.
* `restrict_to_cell` pulls a heterogeneous mechanism back to the sorted
  domain along one cell.
* `symmetrize` averages a mechanism over all relabelings.  The average is
  computed once per sorted representative and then spread by exact value
  copies, so the output is symmetric under exact float equality, not just
  within tolerance.
"""

from __future__ import annotations

import numpy as np

from .mech import (
    AuditReport,
    DEFAULT_TOL,
    Mechanism,
    _report,
    check_ic,
    check_ir,
    pairwise_value,
)
from .typespace import (
    HETEROGENEOUS,
    IDENTICAL,
    all_permutations,
    apply_permutation,
    cell_of,
    inverse_permutation,
    is_strict,
    sort_descending,
)


def _require_strict(mech: Mechanism, op: str) -> None:
    for v in mech.types:
        if not is_strict(v):
            raise ValueError(f"{op} needs strict profiles; {v} has ties")


def _require_orbit_closed(mech: Mechanism, op: str) -> None:
    have = set(mech.types)
    for v in mech.types:
        for sigma in all_permutations(mech.n)[1:]:
            if apply_permutation(v, sigma) not in have:
                raise ValueError(f"{op} needs an orbit-closed domain; missing relabeling of {v}")


def is_symmetric(mech: Mechanism, tol: float = 0.0) -> AuditReport:
    """Audit q_i(v relabeled by sigma) == q_{sigma(i)}(v) and payment
    invariance, over every strict profile and permutation.

    Default tolerance is exact equality: the constructions in this module
    produce symmetry by value copying, so demanding bitwise agreement is
    both meaningful and achievable.
    """
    _require_strict(mech, "is_symmetric")
    _require_orbit_closed(mech, "is_symmetric")
    violations = []
    perms = all_permutations(mech.n)
    for k, v in enumerate(mech.types):
        for sigma in perms[1:]:
            ks = mech.index_of(apply_permutation(v, sigma))
            dt = abs(float(mech.t[ks]) - float(mech.t[k]))
            if dt > tol:
                violations.append(((v, sigma, "t"), dt))
            for i in range(mech.n):
                dq = abs(float(mech.q[ks, i]) - float(mech.q[k, sigma[i]]))
                if dq > tol:
                    violations.append(((v, sigma, "q", i), dq))
    return _report("symmetric", violations)


def is_rank_preserving(mech: Mechanism, tol: float = DEFAULT_TOL) -> AuditReport:
    """Audit v_i > v_j implies q_i(v) >= q_j(v) - tol on every profile."""
    violations = []
    for k, v in enumerate(mech.types):
        for i in range(mech.n):
            for j in range(mech.n):
                if v[i] > v[j]:
                    gap = float(mech.q[k, j] - mech.q[k, i])
                    if gap > tol:
                        violations.append(((v, i, j), gap))
    return _report("rank_preserving", violations)


def check_ic_on_cells(mech: Mechanism, tol: float = DEFAULT_TOL) -> AuditReport:
    """Truthfulness restricted to misreports within the same ordering cell.

    On an identical (sorted) domain every profile shares one cell, so this
    coincides with the full audit there.
    """
    _require_strict(mech, "check_ic_on_cells")
    V = mech.V
    u = (V * mech.q).sum(axis=1) - mech.t
    dev = pairwise_value(V, mech.q) - mech.t[None, :]
    gain = dev - u[:, None]
    cells = [cell_of(v) for v in mech.types]
    violations = []
    n_pairs = 0
    T = len(mech.types)
    for i in range(T):
        for j in range(T):
            if i == j or cells[i] != cells[j]:
                continue
            n_pairs += 1
            if gain[i, j] > tol:
                violations.append(((mech.types[i], mech.types[j]), float(gain[i, j])))
    return _report("ic_on_cells", violations, info={"n_pairs": n_pairs})


def symmetric_extension(mech: Mechanism) -> Mechanism:
    """Spread a sorted strict-domain mechanism over all relabelings.

    At a strict profile v with sorting permutation sigma and sorted image
    w, object sigma(i) inherits allocation coordinate i of w, and the
    payment is copied:  q_ext[sigma[i]](v) = q[i](w),  t_ext(v) = t(w).
    Values are copied bit-for-bit, so the output is exactly symmetric.
    """
    if mech.domain_tag != IDENTICAL:
        raise ValueError("symmetric_extension expects an identical-domain mechanism")
    _require_strict(mech, "symmetric_extension")
    perms = all_permutations(mech.n)
    types = sorted(
        {apply_permutation(w, inverse_permutation(s)) for w in mech.types for s in perms}
    )
    q = np.zeros((len(types), mech.n))
    t = np.zeros(len(types))
    for k, v in enumerate(types):
        sigma = cell_of(v)
        kw = mech.index_of(apply_permutation(v, sigma))
        for i in range(mech.n):
            q[k, sigma[i]] = mech.q[kw, i]
        t[k] = mech.t[kw]
    return Mechanism(types=tuple(types), q=q, t=t, domain_tag=HETEROGENEOUS)


def restrict_to_cell(mech: Mechanism, sigma) -> Mechanism:
    """Pull a heterogeneous mechanism back to the sorted domain along one
    ordering cell: read the mechanism at v = (w relabeled into the cell)
    and store object sigma(i)'s allocation as sorted coordinate i.

    The result tabulates whatever the cell contained; it may well violate
    the identical-domain allocation order, which the feasibility audit
    then flags.
    """
    if mech.domain_tag != HETEROGENEOUS:
        raise ValueError("restrict_to_cell expects a heterogeneous-domain mechanism")
    _require_strict(mech, "restrict_to_cell")
    _require_orbit_closed(mech, "restrict_to_cell")
    sigma = tuple(sigma)
    inv = inverse_permutation(sigma)
    reps = sorted({sort_descending(v) for v in mech.types})
    q = np.zeros((len(reps), mech.n))
    t = np.zeros(len(reps))
    for k, w in enumerate(reps):
        v = apply_permutation(w, inv)
        kv = mech.index_of(v)
        for i in range(mech.n):
            q[k, i] = mech.q[kv, sigma[i]]
        t[k] = mech.t[kv]
    return Mechanism(types=tuple(reps), q=q, t=t, domain_tag=IDENTICAL)


def _hat_mechanism(mech: Mechanism, sigma) -> Mechanism:
    """Relabeled copy of the mechanism along sigma:
    q_hat_i(v) = q_{sigma^{-1}(i)}(v relabeled by sigma), t_hat(v) =
    t(v relabeled by sigma).  Internal building block for `symmetrize`;
    each copy inherits truthfulness and participation from the input.
    """
    sigma = tuple(sigma)
    inv = inverse_permutation(sigma)
    q = np.zeros_like(mech.q)
    t = np.zeros_like(mech.t)
    for k, v in enumerate(mech.types):
        ks = mech.index_of(apply_permutation(v, sigma))
        for i in range(mech.n):
            q[k, i] = mech.q[ks, inv[i]]
        t[k] = mech.t[ks]
    return Mechanism(types=mech.types, q=q, t=t, domain_tag=mech.domain_tag)


def symmetrize(mech: Mechanism) -> Mechanism:
    """Average the mechanism over all object relabelings.

    The average of the relabeled copies is symmetric and, for truthful
    input, truthful (the truthful set is convex).  Under any exchangeable
    distribution it earns the same revenue as the input.  To make the
    output exactly symmetric in floats, the average is evaluated only at
    sorted representatives (permutations enumerated in a fixed order) and
    spread to the rest of each orbit by `symmetric_extension`.
    """
    if mech.domain_tag != HETEROGENEOUS:
        raise ValueError("symmetrize expects a heterogeneous-domain mechanism")
    _require_strict(mech, "symmetrize")
    _require_orbit_closed(mech, "symmetrize")
    perms = all_permutations(mech.n)
    reps = sorted({sort_descending(v) for v in mech.types})
    q = np.zeros((len(reps), mech.n))
    t = np.zeros(len(reps))
    scale = 1.0 / len(perms)
    for k, w in enumerate(reps):
        acc_q = np.zeros(mech.n)
        acc_t = 0.0
        for sigma in perms:
            ks = mech.index_of(apply_permutation(w, sigma))
            inv = inverse_permutation(sigma)
            acc_q += mech.q[ks][list(inv)]
            acc_t += float(mech.t[ks])
        q[k] = acc_q * scale
        t[k] = acc_t * scale
    on_sorted = Mechanism(types=tuple(reps), q=q, t=t, domain_tag=IDENTICAL)
    return symmetric_extension(on_sorted)


def certify_theorem1(mech: Mechanism, tol: float = DEFAULT_TOL) -> AuditReport:
    """For a symmetric mechanism, check both directions of the equivalence

        globally truthful  <=>  rank preserving  and  truthful per cell.

    Returns a passing report when the two sides agree (both hold or both
    fail); a violation means the equivalence itself broke, with the
    sub-reports as evidence.  Non-symmetric input is a usage error
    because the equivalence is only asserted for symmetric mechanisms.
    """
    sym = is_symmetric(mech)
    if not sym.passed:
        raise ValueError("certify_theorem1 needs a symmetric mechanism")
    ic_global = check_ic(mech, tol=tol)
    rp = is_rank_preserving(mech, tol=tol)
    ic_cells = check_ic_on_cells(mech, tol=tol)
    lhs = ic_global.passed
    rhs = rp.passed and ic_cells.passed
    info = {
        "ic_global": ic_global,
        "rank_preserving": rp,
        "ic_on_cells": ic_cells,
        "equivalence_holds": lhs == rhs,
    }
    violations = []
    if lhs != rhs:
        side = "ic-holds-but-decomposition-fails" if lhs else "decomposition-holds-but-ic-fails"
        violations.append(((side,), 1.0))
    return _report("theorem1_equivalence", violations, info=info)


def extend_to_ties(mech: Mechanism, full_types) -> Mechanism:
    """Complete a strict-profile mechanism to a type list with ties by
    copying each tied profile's outcome from its nearest strict neighbor
    (minimal max-norm distance, lexicographically smallest on ties).

    A reporting convenience: the copied outcomes approximate the boundary
    limit but carry no truthfulness guarantee of their own, so audit the
    result if it matters.
    """
    _require_strict(mech, "extend_to_ties")
    full_types = [tuple(float(x) for x in v) for v in full_types]
    strict_list = list(mech.types)
    q = np.zeros((len(full_types), mech.n))
    t = np.zeros(len(full_types))
    for k, v in enumerate(full_types):
        if is_strict(v):
            kv = mech.index_of(v)
            q[k] = mech.q[kv]
            t[k] = mech.t[kv]
            continue
        best = None
        for w in strict_list:
            dist = max(abs(a - b) for a, b in zip(v, w))
            key = (dist, w)
            if best is None or key < best[0]:
                best = (key, w)
        w = best[1]
        kw = mech.index_of(w)
        q[k] = mech.q[kw]
        t[k] = mech.t[kw]
    return Mechanism(types=tuple(full_types), q=q, t=t, domain_tag=mech.domain_tag)
