"""
Run configuration: the SGDLM defaults from Django settings, overridden by a
per-run TOML file.

    k = 1
    big_k = 2000
    seed = 7
    levels = [99, 95, 90]

    [grid]
    delta_gamma = [0.859, 0.894, 0.929, 0.964, 0.999]

    [phase3]
    range = ["2019-01-01", "2022-06-30"]

Every problem is reported as a ConfigError whose message starts with the
dotted path of the offending key.
"""
# Standard library
import copy
import datetime
import hashlib
from dataclasses import dataclass

# Third-party
import iso8601
import toml
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

# First-party/Local
from dlm.filtering import DiscountSet

FACTORS = ("beta", "delta_phi", "delta_gamma")
PHASES = ("phase1", "phase2", "phase3")


class ConfigError(ImproperlyConfigured):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


def _merge(defaults, overrides, prefix=""):
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        path = f"{prefix}{key}"
        if key not in defaults:
            raise ConfigError(path, "unknown key")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(path, "expected a table")
            merged[key] = _merge(defaults[key], value, prefix=f"{path}.")
        else:
            merged[key] = value
    return merged


def _integer(path, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(path, f"must be at least {minimum}, got {value}")
    return value


def _number(path, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _discount(path, value):
    value = _number(path, value)
    if not 0.0 < value <= 1.0:
        raise ConfigError(path, f"must lie in (0, 1], got {value}")
    return value


def _positive(path, value):
    value = _number(path, value)
    if not value > 0:
        raise ConfigError(path, f"must be positive, got {value}")
    return value


def _grid(path, values):
    if not isinstance(values, list) or not values:
        raise ConfigError(path, "expected a nonempty array")
    grid = tuple(_discount(f"{path}[{i}]", v) for i, v in enumerate(values))
    for i in range(1, len(grid)):
        if not grid[i] > grid[i - 1]:
            raise ConfigError(f"{path}[{i}]", "grid is not strictly ascending")
    return grid


def _date(path, value):
    if isinstance(value, datetime.datetime):
        return value.date()
    if isinstance(value, datetime.date):
        return value
    try:
        return iso8601.parse_date(str(value)).date()
    except iso8601.ParseError as error:
        raise ConfigError(path, f"not an ISO-8601 date: {value!r}") from error


def _range(path, value):
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(path, "expected [start, end]")
    start = _date(f"{path}[0]", value[0])
    end = _date(f"{path}[1]", value[1])
    if end < start:
        raise ConfigError(path, f"ends ({end}) before it starts ({start})")
    return start, end


def _plain(value):
    if isinstance(value, dict):
        return {key: _plain(value[key]) for key in sorted(value)}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, datetime.date):
        return value.isoformat()
    return value


@dataclass(frozen=True)
class RunConfig:
    k: int
    big_k: int
    big_n: int
    seed: int
    beta: float
    delta_phi: float
    delta_gamma: float
    grids: dict
    search_order: tuple
    iterations: int
    ess_floor: float
    ess_flag_fraction: float
    prior: dict
    levels: tuple
    z_values: tuple
    full_precision_z: bool
    sma_window: int
    workers: int
    forward_fill: bool
    ranges: dict
    prices: str
    output_dir: str

    @property
    def discounts(self):
        return DiscountSet(
            beta=self.beta,
            delta_phi=self.delta_phi,
            delta_gamma=self.delta_gamma,
        )

    def as_dict(self):
        return _plain(
            {
                "k": self.k,
                "big_k": self.big_k,
                "big_n": self.big_n,
                "seed": self.seed,
                "beta": self.beta,
                "delta_phi": self.delta_phi,
                "delta_gamma": self.delta_gamma,
                "grid": self.grids,
                "search_order": self.search_order,
                "iterations": self.iterations,
                "ess_floor": self.ess_floor,
                "ess_flag_fraction": self.ess_flag_fraction,
                "prior": self.prior,
                "levels": [round(level * 100, 10) for level in self.levels],
                "z_values": self.z_values,
                "full_precision_z": self.full_precision_z,
                "sma_window": self.sma_window,
                "workers": self.workers,
                "data": {"forward_fill": self.forward_fill},
                **{
                    phase: {"range": list(self.ranges[phase])}
                    for phase in PHASES
                },
                "paths": {
                    "prices": self.prices,
                    "output_dir": self.output_dir,
                },
            }
        )

    def digest(self):
        """SHA-256 of the canonical TOML form of the merged configuration."""
        canonical = toml.dumps(self.as_dict())
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_run_config(values):
    """
    Validate a merged configuration mapping into a RunConfig.
    """
    grids = {
        factor: _grid(f"grid.{factor}", values["grid"][factor])
        for factor in FACTORS
    }
    search_order = values["search_order"]
    if not isinstance(search_order, list) or not search_order:
        raise ConfigError("search_order", "expected a nonempty array")
    for i, factor in enumerate(search_order):
        if factor not in FACTORS:
            raise ConfigError(
                f"search_order[{i}]", f"unknown discount factor {factor!r}"
            )

    levels = values["levels"]
    if not isinstance(levels, list) or not levels:
        raise ConfigError("levels", "expected a nonempty array")
    fractions = []
    for i, level in enumerate(levels):
        level = _number(f"levels[{i}]", level)
        if not 1 <= level <= 99:
            raise ConfigError(
                f"levels[{i}]", f"percentages run from 1 to 99, got {level}"
            )
        fractions.append(level / 100.0)
    z_values = values["z_values"]
    if z_values:
        if not isinstance(z_values, list) or len(z_values) != len(levels):
            raise ConfigError(
                "z_values", f"expected {len(levels)} values, one per level"
            )
        z_values = tuple(
            _positive(f"z_values[{i}]", z) for i, z in enumerate(z_values)
        )
    else:
        z_values = ()

    ranges = {
        phase: _range(f"{phase}.range", values[phase]["range"])
        for phase in PHASES
    }
    for earlier, later in zip(PHASES, PHASES[1:]):
        if not ranges[earlier][1] < ranges[later][0]:
            raise ConfigError(
                f"{later}.range",
                f"must start after {earlier} ends ({ranges[earlier][1]})",
            )

    flag_fraction = _number("ess_flag_fraction", values["ess_flag_fraction"])
    if not 0.0 <= flag_fraction <= 1.0:
        raise ConfigError("ess_flag_fraction", "must lie in [0, 1]")
    if not isinstance(values["full_precision_z"], bool):
        raise ConfigError("full_precision_z", "expected true or false")
    if not isinstance(values["data"]["forward_fill"], bool):
        raise ConfigError("data.forward_fill", "expected true or false")

    return RunConfig(
        k=_integer("k", values["k"], 0),
        big_k=_integer("big_k", values["big_k"], 2),
        big_n=_integer("big_n", values["big_n"], 2),
        seed=_integer("seed", values["seed"], 0),
        beta=_discount("beta", values["beta"]),
        delta_phi=_discount("delta_phi", values["delta_phi"]),
        delta_gamma=_discount("delta_gamma", values["delta_gamma"]),
        grids=grids,
        search_order=tuple(search_order),
        iterations=_integer("iterations", values["iterations"], 1),
        ess_floor=_positive("ess_floor", values["ess_floor"]),
        ess_flag_fraction=flag_fraction,
        prior={
            "r0": _positive("prior.r0", values["prior"]["r0"]),
            "c0": _positive("prior.c0", values["prior"]["c0"]),
            "R_phi": _positive("prior.R_phi", values["prior"]["R_phi"]),
            "R_gamma": _positive("prior.R_gamma", values["prior"]["R_gamma"]),
        },
        levels=tuple(fractions),
        z_values=z_values,
        full_precision_z=values["full_precision_z"],
        sma_window=_integer("sma_window", values["sma_window"], 1),
        workers=_integer("workers", values["workers"], 1),
        forward_fill=values["data"]["forward_fill"],
        ranges=ranges,
        prices=str(values["paths"]["prices"]),
        output_dir=str(values["paths"]["output_dir"]),
    )


def load_run_config(path=None, **overrides):
    """
    settings.SGDLM, then the TOML file at `path` (if any), then keyword
    overrides (top-level keys only), validated into a RunConfig.
    """
    values = settings.SGDLM
    if path:
        try:
            document = toml.load(path)
        except toml.TomlDecodeError as error:
            raise ConfigError(str(path), f"malformed TOML: {error}") from error
        except OSError as error:
            raise ConfigError(str(path), f"cannot read: {error}") from error
        values = _merge(values, document)
    if overrides:
        values = _merge(values, overrides)
    return build_run_config(values)
