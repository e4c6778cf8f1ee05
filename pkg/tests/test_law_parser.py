"""
Test suite for the law parser module.

Tests parsing of law specification strings, rendering back to canonical form
and rejection of malformed or lattice laws.
"""

import pytest
from src.errors import LatticeLawError, LawParseError
from src.law_library import BetaLaw, DiracLaw, ExampleGammaLaw, LogParetoLaw
from src.law_parser import LawParser, parse_law, render_law


class TestLawParser:
    """Test cases for the LawParser class"""

    def setup_method(self):
        """Set up test fixtures"""
        self.parser = LawParser()

    def test_beta_laws(self):
        """Test parsing beta laws"""
        assert self.parser.parse("beta(1,1)") == BetaLaw(1, 1)
        assert self.parser.parse("Beta(2, 1)") == BetaLaw(2, 1)
        assert self.parser.parse("  beta( 0.5 , 0.5 )  ") == BetaLaw(0.5, 0.5)

    def test_log_pareto_laws(self):
        """Test one- and two-parameter log-Pareto laws"""
        assert self.parser.parse("logpareto(0.5)") == LogParetoLaw(0.5)
        law = self.parser.parse("LogPareto(1.5, 2)")
        assert law.alpha == 1.5
        assert law.x0 == 2.0

    def test_example_gamma(self):
        """Test the gamma example law"""
        assert self.parser.parse("examplegamma(0.3)") == ExampleGammaLaw(0.3)

    def test_scientific_notation(self):
        """Test numbers in exponent notation"""
        assert self.parser.parse("beta(1e0, 2.5E-1)") == BetaLaw(1.0, 0.25)

    def test_malformed_strings(self):
        """Test that malformed specifications raise LawParseError"""
        for text in ("", "beta", "beta(1)", "beta(1,2,3)", "gauss(0,1)", "beta(1;1)", "beta(a,b)"):
            with pytest.raises(LawParseError):
                self.parser.parse(text)

    def test_invalid_parameters(self):
        """Test that out-of-range parameters raise LawParseError"""
        with pytest.raises(LawParseError):
            self.parser.parse("beta(-1,1)")
        with pytest.raises(LawParseError):
            self.parser.parse("logpareto(3)")
        with pytest.raises(LawParseError):
            self.parser.parse("examplegamma(0.7)")

    def test_lattice_laws(self):
        """Test the lattice override"""
        with pytest.raises(LatticeLawError):
            self.parser.parse("dirac(0.5)")
        lattice_parser = LawParser(allow_lattice=True)
        assert lattice_parser.parse("dirac(0.5)") == DiracLaw(0.5, allow_lattice=True)

    def test_family_arity(self):
        """Test the arity table covers every family"""
        assert set(LawParser.FAMILY_ARITY) == {'beta', 'logpareto', 'examplegamma', 'dirac'}


class TestConvenienceFunctions:
    """Test parse_law and render_law"""

    def test_parse_law(self):
        """Test the module-level parser"""
        assert parse_law("beta(2,1)") == BetaLaw(2, 1)
        assert isinstance(parse_law("dirac(0.25)", allow_lattice=True), DiracLaw)
        with pytest.raises(LatticeLawError):
            parse_law("dirac(0.25)")

    def test_render_is_canonical(self):
        """Test that rendering then parsing gives the same law"""
        for law in (BetaLaw(1, 1), BetaLaw(0.5, 2.5), LogParetoLaw(1.5), LogParetoLaw(0.5, 3),
                    ExampleGammaLaw(0.3)):
            assert parse_law(render_law(law)) == law
        assert render_law(parse_law("Beta( 2 , 1 )")) == "beta(2,1)"


if __name__ == "__main__":
    pytest.main([__file__])
