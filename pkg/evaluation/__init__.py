# Two-decimal normal critical values z_{a/2} used in the standard
# coverage tables, keyed by interval level.
ROUNDED_Z = {
    0.99: 2.58,
    0.95: 1.96,
    0.90: 1.64,
    0.80: 1.28,
    0.50: 0.67,
    0.20: 0.25,
    0.10: 0.13,
}
