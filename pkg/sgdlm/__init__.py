# |det(I - Gamma)| below this is treated as singular
DETERMINANT_FLOOR = 1e-300
# forecast_day gives up when more than this fraction of draws is singular
MAX_SINGULAR_FRACTION = 0.01
# Tags mixed into the day's seed so the phases draw from unrelated streams.
PHASE_SEED_TAGS = {"phase2": 2, "phase3": 3, "simulate": 9}
