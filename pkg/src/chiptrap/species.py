"""Atomic species constants and their key-value config loader."""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from scipy import constants as sc

ATOMIC_MASS_UNIT = sc.physical_constants["atomic mass constant"][0]


@dataclass(frozen=True)
class SpeciesConstants:
    """Mass and magnetic moment of a trapped species (SI units)."""

    name: str
    mass: float  # kg
    mu_B: float = sc.physical_constants["Bohr magneton"][0]  # J/T
    hbar: float = sc.hbar  # J s
    g_factor: float = 1.0

    def __post_init__(self):
        for attr in ("mass", "mu_B", "hbar", "g_factor"):
            if not getattr(self, attr) > 0:
                raise ValueError(f"species {attr} must be positive, got {getattr(self, attr)!r}")

    @property
    def moment(self) -> float:
        """Effective magnetic moment g * mu_B (J/T)."""
        return self.g_factor * self.mu_B


RB87 = SpeciesConstants(name="Rb87", mass=86.909 * ATOMIC_MASS_UNIT)

BUILTIN = {"rb87": RB87}


def get_species(name: str) -> SpeciesConstants:
    try:
        return BUILTIN[name.lower()]
    except KeyError:
        raise ValueError(f"unknown species {name!r}; known: {', '.join(sorted(BUILTIN))}") from None


def species_from_mapping(section) -> SpeciesConstants:
    """Build species constants from a mapping (e.g. a config section).

    Recognised keys: ``name``, ``mass`` (kg) or ``mass_u`` (atomic mass units),
    ``mu_b`` (J/T), ``hbar`` (J s), ``g_factor``. Missing magnetic constants
    fall back to CODATA values.
    """
    keys = {k.lower(): v for k, v in section.items()}
    name = keys.get("name", "custom")
    if "mass" in keys:
        mass = float(keys["mass"])
    elif "mass_u" in keys:
        mass = float(keys["mass_u"]) * ATOMIC_MASS_UNIT
    elif name.lower() in BUILTIN:
        mass = BUILTIN[name.lower()].mass
    else:
        raise ValueError("species config needs 'mass' (kg) or 'mass_u'")
    kwargs = {}
    if "mu_b" in keys:
        kwargs["mu_B"] = float(keys["mu_b"])
    if "hbar" in keys:
        kwargs["hbar"] = float(keys["hbar"])
    if "g_factor" in keys:
        kwargs["g_factor"] = float(keys["g_factor"])
    return SpeciesConstants(name=name, mass=mass, **kwargs)


def load_species(path: str | Path, section: str = "species") -> SpeciesConstants:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(path)
    if not parser.has_section(section):
        raise ValueError(f"{path}: no [{section}] section")
    return species_from_mapping(parser[section])
