"""apvar: numerical laboratory for the variance of primes in arithmetic
progressions, Dirichlet L-function zeros, and the associated random model."""

__version__ = "0.1.0"
