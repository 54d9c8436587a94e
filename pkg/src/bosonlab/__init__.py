"""Desk-scale numerics for trapped bosons: exact diagonalisation in mode space,
mean-field functionals, two-body scattering, de Finetti measures, symbol
calculus, Bogoliubov theory and correlated trial states."""

__version__ = "0.1.0"
