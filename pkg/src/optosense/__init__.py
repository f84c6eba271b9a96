"""Noise spectra of an optomechanical force sensor with two phase-linked oscillators."""
