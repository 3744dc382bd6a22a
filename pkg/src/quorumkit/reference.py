"""Published reference values the tooling reproduces and diffs against.

The two grids are classical three-decimal tables from the group-competence
literature: majority-vote reliability over group size and competence, and
Bayes-adjusted competence over prior and competence.  The critical
competence pairs are the values reported by Margolis (1976) for a weaker
group joining a stronger one.
"""

from __future__ import annotations

# rows: agent count; columns: competence
CONSENSUS_TABLE_ROWS: tuple[int, ...] = (3, 5, 7, 9)
CONSENSUS_TABLE_COLS: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
CONSENSUS_TABLE: tuple[tuple[float, ...], ...] = (
    (0.028, 0.216, 0.500, 0.784, 0.972),
    (0.009, 0.163, 0.500, 0.837, 0.991),
    (0.003, 0.126, 0.500, 0.874, 0.997),
    (0.001, 0.099, 0.500, 0.901, 0.999),
)

# rows: prior that the favoured alternative is true; columns: competence
ADJUSTED_TABLE_ROWS: tuple[float, ...] = (
    0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
)
ADJUSTED_TABLE_COLS: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
ADJUSTED_TABLE: tuple[tuple[float, ...], ...] = (
    (0.012, 0.045, 0.100, 0.206, 0.500),
    (0.027, 0.097, 0.200, 0.368, 0.692),
    (0.045, 0.155, 0.300, 0.500, 0.794),
    (0.069, 0.222, 0.400, 0.609, 0.857),
    (0.100, 0.300, 0.500, 0.700, 0.900),
    (0.143, 0.391, 0.600, 0.778, 0.931),
    (0.206, 0.500, 0.700, 0.845, 0.955),
    (0.308, 0.632, 0.800, 0.903, 0.973),
    (0.500, 0.794, 0.900, 0.955, 0.988),
)

# Margolis (1976): minimum competence of a joining group, by base competence
CRITICAL_COMPETENCE_REFERENCE: dict[float, float] = {
    0.6: 0.55,
    0.7: 0.62,
    0.8: 0.70,
    0.9: 0.82,
}
