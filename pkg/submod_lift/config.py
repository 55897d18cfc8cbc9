"""
Runtime settings: brute-force caps and numeric tolerances.
"""
import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Mapping, Optional

logger = logging.getLogger(__name__)

ENV_PREFIX = "SUBMOD_LIFT_"


@dataclass(frozen=True)
class Settings:
    """
    Caps and tolerances shared by every solver.

    Caps are counted in ground-set elements unless noted otherwise;
    exceeding one raises CapExceededError instead of running long.
    """
    brute_cap: int = 16
    multi_cap: int = 12
    lattice_cap: int = 10
    sfm_brute_cap: int = 24
    ring_cap: int = 2 ** 20          # candidate sets, not elements
    robust_cap: int = 10 ** 6        # removal sets or placements
    lp_oracle_cap: int = 10
    tolerance: float = 1e-9
    lp_tolerance: float = 1e-4
    rational_denominator: int = 10 ** 6
    min_norm_max_iter: int = 10000
    msca_bisection_steps: int = 64
    subgradient_iter_factor: int = 50
    cutting_plane_max_iter: int = 500

    def with_overrides(self, **overrides) -> "Settings":
        """Copy with some fields replaced; ``None`` values are ignored."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes)

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Settings":
        """
        Build settings from SUBMOD_LIFT_<FIELD> environment variables.

        Unset variables keep their defaults; malformed values are
        logged and ignored.
        """
        environ = os.environ if environ is None else environ
        changes = {}
        for entry in fields(cls):
            raw = environ.get(ENV_PREFIX + entry.name.upper())
            if raw is None:
                continue
            caster = float if entry.type in (float, "float") else int
            try:
                changes[entry.name] = caster(raw)
            except ValueError:
                logger.warning("Ignoring %s=%r: not a valid %s",
                               ENV_PREFIX + entry.name.upper(), raw, caster.__name__)
        return replace(cls(), **changes)


DEFAULT_SETTINGS = Settings()


def resolve(settings: Optional[Settings]) -> Settings:
    return DEFAULT_SETTINGS if settings is None else settings
