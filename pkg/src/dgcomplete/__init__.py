"""dgcomplete: exact derived double centralizers and homotopy limits of dg algebras."""

__version__ = "0.1.0"
