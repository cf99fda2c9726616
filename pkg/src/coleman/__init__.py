"""Coleman integration on curves over Q_p with provable output precision.

The package computes single Coleman integrals of differentials of the second
kind on a smooth projective curve given by a (possibly singular) plane model,
together with an absolute p-adic precision bound on every reported digit.
"""

__version__ = "0.1.0"
