"""
Test suite for the Bernoulli sieve laboratory.
"""
