"""Configuration, sweep scheduling, persistence, verification and plot emission."""
