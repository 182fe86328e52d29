"""
Scenario definitions and run configuration
"""
