"""
Law specification parser for converting law strings to WLaw objects.

This module handles the grammar used by the CLI and scenario files:
- Beta laws: beta(1,1), Beta(2, 1), beta(0.5,0.5)
- Log-Pareto laws: logpareto(0.5), logpareto(1.5, 2)
- The gamma example law: examplegamma(0.3)
- Dirac masses: dirac(0.5), rejected unless the lattice override is given

Names are matched case-insensitively and whitespace is ignored.
"""

import re
from typing import Callable, Dict, List

from .errors import LatticeLawError, LawParseError
from .law_library import BetaLaw, DiracLaw, ExampleGammaLaw, LogParetoLaw, WLaw


class LawParser:
    """
    Parses law specification strings into WLaw objects.

    Each family name maps to a builder together with the number of
    parameters it accepts (minimum, maximum).
    """

    FAMILY_ARITY = {
        'beta': (2, 2),
        'logpareto': (1, 2),
        'examplegamma': (1, 1),
        'dirac': (1, 1),
    }

    def __init__(self, allow_lattice: bool = False):
        """
        Initialize the law parser.

        Args:
            allow_lattice: accept lattice laws (Dirac masses) for exploratory use
        """
        self.allow_lattice = allow_lattice
        self._compile_patterns()

    def _compile_patterns(self):
        """Compile regex patterns for parsing law strings"""
        number_pattern = r'[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?'
        family_options = '|'.join(sorted(self.FAMILY_ARITY, key=len, reverse=True))
        self.law_pattern = re.compile(
            rf'^\s*({family_options})\s*\(\s*((?:{number_pattern})(?:\s*,\s*{number_pattern})*)\s*\)\s*$',
            re.IGNORECASE
        )
        self.number_pattern = re.compile(number_pattern)

    def parse(self, law_string: str) -> WLaw:
        """
        Parse a law string into a WLaw.

        Args:
            law_string: e.g. "beta(1,1)" or "logpareto(0.5, 1)"

        Returns:
            The corresponding law object

        Raises:
            LawParseError: if the string is malformed or the parameters are invalid
            LatticeLawError: for a lattice law without the override
        """
        if not law_string or not isinstance(law_string, str):
            raise LawParseError("Law specification must be a non-empty string")

        match = self.law_pattern.match(law_string)
        if not match:
            raise LawParseError(
                f"Cannot parse law specification: {law_string!r} "
                f"(expected one of {', '.join(self.FAMILY_ARITY)} with parameters in parentheses)")

        family = match.group(1).lower()
        params = [float(p) for p in self.number_pattern.findall(match.group(2))]
        low, high = self.FAMILY_ARITY[family]
        if not low <= len(params) <= high:
            raise LawParseError(
                f"{family} takes {low if low == high else f'{low} to {high}'} parameter(s), got {len(params)}")

        try:
            return self._build_law(family, params)
        except LatticeLawError:
            raise
        except ValueError as e:
            raise LawParseError(f"Error parsing {law_string!r}: {e}")

    def _build_law(self, family: str, params: List[float]) -> WLaw:
        builders: Dict[str, Callable[[], WLaw]] = {
            'beta': lambda: BetaLaw(params[0], params[1]),
            'logpareto': lambda: LogParetoLaw(*params),
            'examplegamma': lambda: ExampleGammaLaw(params[0]),
            'dirac': lambda: DiracLaw(params[0], allow_lattice=self.allow_lattice),
        }
        return builders[family]()


_default_parser = LawParser()


def parse_law(law_string: str, allow_lattice: bool = False) -> WLaw:
    """Convenience function to parse a law string"""
    if allow_lattice:
        return LawParser(allow_lattice=True).parse(law_string)
    return _default_parser.parse(law_string)


def render_law(law: WLaw) -> str:
    """Canonical law string; parse_law(render_law(law)) == law for shipped families"""
    return law.law_string()
