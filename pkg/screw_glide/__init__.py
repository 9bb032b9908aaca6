"""
Screw glide module.

This package simulates screw dislocations restricted to crystallographic glide
directions: minimising movements, the glide differential inclusion and the
energy-dissipation audits that connect them.
"""

__version__ = '0.3.0'
