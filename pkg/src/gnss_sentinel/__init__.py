"""GNSS interference detection toolkit.

Two pipelines: tabular GPS-spoofing classification (13-feature receiver
observables, four attack grades) and spectrogram-based jamming classification
(six interference classes from complex baseband IQ).
"""

__version__ = "0.1.0"
