"""Independent brute-force references used as oracles in tests.

Everything here is deliberately naive: explicit lookup tables, linear
scans, no shared code with the package. Floating-point results coincide
bit-for-bit with the engine on integer-valued inputs because both reduce to
ratios of small integer counts.
"""


def brute_ecdf_table(values, weights=None):
    """Sorted (support, cdf value) pairs by direct counting."""
    if weights is None:
        weights = [1.0] * len(values)
    total = float(sum(weights))
    support = sorted(set(values))
    table = []
    for y in support:
        mass_le = sum(w for v, w in zip(values, weights) if v <= y)
        table.append((float(y), mass_le / total))
    return table


def brute_cdf(table, y):
    out = 0.0
    for point, f in table:
        if point <= y:
            out = f
        else:
            break
    return out


def brute_quantile(table, tau):
    """inf { y : F(y) >= tau } by linear scan."""
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau out of range")
    for point, f in table:
        if f >= tau:
            return point
    return table[-1][0]


def brute_rank_transform(source_values, target_values, y):
    src = brute_ecdf_table(source_values)
    tgt = brute_ecdf_table(target_values)
    u = brute_cdf(src, y)
    if u == 0.0:
        return tgt[0][0]
    return brute_quantile(tgt, u)


def brute_counterfactual_panel(control_pairs, treated_pre):
    """Transformed outcomes and the counterfactual (support, weights) table.

    control_pairs: iterable of (y_pre, dy) for control units.
    Returns (sorted transformed list, [(support point, mass)] with integer
    masses, one per distinct transformed value).
    """
    transformed = []
    for y_pre, dy in control_pairs:
        transformed.append(dy + brute_rank_transform(
            [p for p, _ in control_pairs], treated_pre, y_pre
        ))
    support = sorted(set(transformed))
    masses = [(y, float(sum(1 for t in transformed if t == y))) for y in support]
    return sorted(transformed), masses
